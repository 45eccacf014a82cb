// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <variant>

#include "verifact/corpus.hpp"
#include "verifact/index.hpp"

namespace verifact {

/// Question and generated answer joined by a single space, used as the
/// retrieval query.
struct CombinedQuery {
    std::string qid;
    std::string text;
};

/// Throws PreconditionError when either part is empty.
CombinedQuery combine_query(std::string_view qid, std::string_view question, std::string_view answer);

/// Top-ranked passage for a combined query.
struct Evidence {
    std::string pid;
    std::string passage_text;
    std::optional<double> score;
    std::string retriever_id;
    std::optional<std::string> reader_answer;  // set iff the reader stage ran

    friend bool operator==(const Evidence&, const Evidence&) = default;
};

/// The retriever had nothing to offer. `diagnostic` says why.
struct NoEvidence {
    std::string diagnostic;
};

using RetrievalResult = std::variant<Evidence, NoEvidence>;

class Retriever {
public:
    virtual ~Retriever() = default;
    virtual const std::string& id() const noexcept = 0;
    virtual RetrievalResult retrieve(const CombinedQuery& query) const = 0;

    /// Identity plus whatever settings change its output; part of resume keys.
    virtual std::string fingerprint() const { return id(); }
};

/// Top-1 BM25 over an in-memory index.
class Bm25Retriever final : public Retriever {
public:
    Bm25Retriever(const Corpus& corpus, const InvertedIndex& index, std::string id = "bm25");

    const std::string& id() const noexcept override { return id_; }
    RetrievalResult retrieve(const CombinedQuery& query) const override;
    std::string fingerprint() const override;

private:
    const Corpus& corpus_;
    const InvertedIndex& index_;
    std::string id_;
};

}  // namespace verifact
