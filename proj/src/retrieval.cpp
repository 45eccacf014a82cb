// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include "verifact/retrieval.hpp"

#include <fmt/format.h>

#include "verifact/error.hpp"

namespace verifact {

CombinedQuery combine_query(std::string_view qid, std::string_view question, std::string_view answer) {
    if (question.empty() || answer.empty()) {
        throw PreconditionError("combined query needs a non-empty question and answer");
    }
    std::string text;
    text.reserve(question.size() + 1 + answer.size());
    text.append(question).append(" ").append(answer);
    return {std::string(qid), std::move(text)};
}

Bm25Retriever::Bm25Retriever(const Corpus& corpus, const InvertedIndex& index, std::string id)
    : corpus_(corpus), index_(index), id_(std::move(id)) {
    if (corpus_.size() != index_.doc_count()) {
        throw PreconditionError(fmt::format("index covers {} passages but the corpus has {}", index_.doc_count(),
                                            corpus_.size()));
    }
}

RetrievalResult Bm25Retriever::retrieve(const CombinedQuery& query) const {
    const auto hits = index_.search(query.text, 1);
    if (hits.empty()) {
        return NoEvidence{"no passage shares a term with the combined query"};
    }
    const auto* passage = corpus_.find(hits.front().pid);
    if (passage == nullptr) {
        return NoEvidence{fmt::format("index returned pid '{}' which is not in the corpus", hits.front().pid)};
    }
    return Evidence{passage->pid, passage->text, hits.front().score, id_, std::nullopt};
}

std::string Bm25Retriever::fingerprint() const {
    return fmt::format("{}:k1={}:b={}:n={}", id_, index_.params().k1, index_.params().b, index_.doc_count());
}

}  // namespace verifact
