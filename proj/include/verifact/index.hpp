// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "verifact/corpus.hpp"

namespace verifact {

/// Okapi BM25 free parameters. The defaults are the values tuned for MS MARCO
/// passage ranking.
struct Bm25Params {
    double k1 = 0.82;
    double b = 0.68;

    friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct Posting {
    uint32_t doc;  // ordinal in the corpus
    uint32_t tf;

    friend bool operator==(const Posting&, const Posting&) = default;
};

struct ScoredPassage {
    std::string pid;
    double score = 0.0;
    int rank = 0;  // 1-based

    friend bool operator==(const ScoredPassage&, const ScoredPassage&) = default;
};

/// ln(1 + (N - df + 0.5) / (df + 0.5)); non-negative for every df in [0, N].
double bm25_idf(size_t doc_count, size_t doc_freq) noexcept;

/// Single-term BM25 contribution for a document with term frequency `tf` and
/// length `doc_len`.
double bm25_term_weight(double idf, double tf, double doc_len, double avg_doc_len, const Bm25Params& params) noexcept;

/// Term -> postings index over a Corpus. Immutable after build; concurrent
/// queries are safe.
class InvertedIndex {
public:
    static constexpr uint32_t kSnapshotVersion = 1;

    /// Throws PreconditionError for an empty corpus or out-of-range params.
    static InvertedIndex build(const Corpus& corpus, Bm25Params params = {});

    size_t doc_count() const noexcept { return pids_.size(); }
    double avg_doc_len() const noexcept { return avg_doc_len_; }
    const Bm25Params& params() const noexcept { return params_; }
    uint32_t doc_length(size_t ordinal) const { return doc_lengths_[ordinal]; }
    const std::string& pid(size_t ordinal) const { return pids_[ordinal]; }
    size_t vocabulary_size() const noexcept { return postings_.size(); }
    uint64_t total_tokens() const noexcept { return total_tokens_; }

    /// Empty span for unseen terms.
    std::span<const Posting> postings(std::string_view term) const;
    size_t doc_freq(std::string_view term) const { return postings(term).size(); }

    /// Every indexed term, sorted.
    std::vector<std::string> terms() const;

    double idf(std::string_view term) const { return bm25_idf(doc_count(), doc_freq(term)); }

    /// BM25 of one document against a bag of query terms; repeated terms
    /// count once.
    double score(std::span<const std::string> query_terms, size_t doc_ordinal) const;

    /// Top `k` documents with score > 0, by score descending then pid
    /// ascending. Throws PreconditionError when k == 0.
    std::vector<ScoredPassage> search(std::string_view query_text, size_t k) const;

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static InvertedIndex load(std::istream& in);
    static InvertedIndex load(const std::filesystem::path& path);

private:
    InvertedIndex() = default;
    void finalize();

    Bm25Params params_;
    std::vector<std::string> pids_;
    std::vector<uint32_t> doc_lengths_;
    double avg_doc_len_ = 0.0;
    uint64_t total_tokens_ = 0;
    std::unordered_map<std::string, uint32_t> term_ids_;
    std::vector<std::vector<Posting>> postings_;
};

/// Reference implementation of search: scores every passage by direct formula
/// evaluation, without an index. Used to cross-check InvertedIndex::search.
std::vector<ScoredPassage> exhaustive_search(const Corpus& corpus, std::string_view query_text, size_t k,
                                             Bm25Params params = {});

/// Distinct terms of `query_text` in first-occurrence order.
std::vector<std::string> distinct_query_terms(std::string_view query_text);

}  // namespace verifact
