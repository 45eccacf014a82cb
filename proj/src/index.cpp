// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include "verifact/index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>

#include "verifact/error.hpp"
#include "verifact/text.hpp"

namespace verifact {

namespace {

constexpr char kMagic[8] = {'V', 'F', 'B', 'M', '2', '5', 'I', 'X'};

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

void check_params(const Bm25Params& params) {
    if (!(params.k1 >= 0.0) || !std::isfinite(params.k1)) {
        throw PreconditionError(fmt::format("BM25 k1 must be >= 0, got {}", params.k1));
    }
    if (!(params.b >= 0.0 && params.b <= 1.0)) {
        throw PreconditionError(fmt::format("BM25 b must be in [0, 1], got {}", params.b));
    }
}

bool ranks_before(const ScoredPassage& a, const ScoredPassage& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.pid < b.pid;
}

std::vector<ScoredPassage> take_top(std::vector<ScoredPassage> candidates, size_t k) {
    const size_t n = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n), candidates.end(),
                      ranks_before);
    candidates.resize(n);
    for (size_t i = 0; i < n; ++i) {
        candidates[i].rank = static_cast<int>(i + 1);
    }
    return candidates;
}

// Per-thread score accumulator, reused across queries.
struct Accumulator {
    std::vector<double> scores;
    std::vector<uint32_t> touched;
};

Accumulator& thread_accumulator(size_t doc_count) {
    thread_local Accumulator acc;
    if (acc.scores.size() < doc_count) {
        acc.scores.resize(doc_count, 0.0);
    }
    return acc;
}

template <typename T>
void put(std::ostream& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.write(buf, sizeof(T));
}

void put_string(std::ostream& out, std::string_view s) {
    put<uint32_t>(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
    char buf[sizeof(T)];
    if (!in.read(buf, sizeof(T))) {
        throw InputError("index snapshot truncated");
    }
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

std::string get_string(std::istream& in) {
    const auto len = get<uint32_t>(in);
    std::string s(len, '\0');
    if (len > 0 && !in.read(s.data(), len)) {
        throw InputError("index snapshot truncated");
    }
    return s;
}

}  // namespace

double bm25_idf(size_t doc_count, size_t doc_freq) noexcept {
    const auto n = static_cast<double>(doc_count);
    const auto df = static_cast<double>(doc_freq);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double bm25_term_weight(double idf, double tf, double doc_len, double avg_doc_len, const Bm25Params& params) noexcept {
    const double norm = params.k1 * (1.0 - params.b + params.b * doc_len / avg_doc_len);
    return idf * tf * (params.k1 + 1.0) / (tf + norm);
}

std::vector<std::string> distinct_query_terms(std::string_view query_text) {
    std::vector<std::string> terms;
    std::unordered_set<std::string> seen;
    for (auto& t : tokenize(query_text)) {
        if (seen.insert(t).second) {
            terms.push_back(std::move(t));
        }
    }
    return terms;
}

InvertedIndex InvertedIndex::build(const Corpus& corpus, Bm25Params params) {
    check_params(params);
    if (corpus.empty()) {
        throw PreconditionError("cannot build an index over an empty corpus");
    }
    if (corpus.size() > std::numeric_limits<uint32_t>::max()) {
        throw PreconditionError("corpus too large for 32-bit ordinals");
    }

    InvertedIndex index;
    index.params_ = params;
    index.pids_.reserve(corpus.size());
    index.doc_lengths_.reserve(corpus.size());

    std::unordered_map<std::string, uint32_t> tf;
    for (size_t ord = 0; ord < corpus.size(); ++ord) {
        const auto tokens = tokenize(corpus[ord].text);
        tf.clear();
        for (const auto& t : tokens) {
            ++tf[t];
        }
        for (auto& [term, count] : tf) {
            auto [it, inserted] = index.term_ids_.try_emplace(term, static_cast<uint32_t>(index.postings_.size()));
            if (inserted) {
                index.postings_.emplace_back();
            }
            // Ordinals are visited in increasing order, so each list stays sorted.
            index.postings_[it->second].push_back({static_cast<uint32_t>(ord), count});
        }
        index.pids_.push_back(corpus[ord].pid);
        index.doc_lengths_.push_back(static_cast<uint32_t>(tokens.size()));
    }
    index.finalize();
    return index;
}

void InvertedIndex::finalize() {
    total_tokens_ = 0;
    for (const auto len : doc_lengths_) {
        total_tokens_ += len;
    }
    avg_doc_len_ = pids_.empty() ? 0.0 : static_cast<double>(total_tokens_) / static_cast<double>(pids_.size());
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    const auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) {
        return {};
    }
    return postings_[it->second];
}

std::vector<std::string> InvertedIndex::terms() const {
    std::vector<std::string> out;
    out.reserve(term_ids_.size());
    for (const auto& [term, id] : term_ids_) {
        out.push_back(term);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double InvertedIndex::score(std::span<const std::string> query_terms, size_t doc_ordinal) const {
    if (doc_ordinal >= doc_count()) {
        throw PreconditionError(fmt::format("document ordinal {} out of range", doc_ordinal));
    }
    std::unordered_set<std::string_view> seen;
    double total = 0.0;
    for (const auto& term : query_terms) {
        if (!seen.insert(term).second) {
            continue;
        }
        const auto list = postings(term);
        const auto it = std::lower_bound(list.begin(), list.end(), doc_ordinal,
                                         [](const Posting& p, size_t doc) { return p.doc < doc; });
        if (it == list.end() || it->doc != doc_ordinal) {
            continue;
        }
        total += bm25_term_weight(bm25_idf(doc_count(), list.size()), it->tf, doc_lengths_[doc_ordinal],
                                  avg_doc_len_, params_);
    }
    return total;
}

std::vector<ScoredPassage> InvertedIndex::search(std::string_view query_text, size_t k) const {
    if (k == 0) {
        throw PreconditionError("search requires k >= 1");
    }
    auto& acc = thread_accumulator(doc_count());
    acc.touched.clear();

    for (const auto& term : distinct_query_terms(query_text)) {
        const auto list = postings(term);
        if (list.empty()) {
            continue;
        }
        const double idf = bm25_idf(doc_count(), list.size());
        for (const auto& p : list) {
            const double w = bm25_term_weight(idf, p.tf, doc_lengths_[p.doc], avg_doc_len_, params_);
            if (acc.scores[p.doc] == 0.0) {
                acc.touched.push_back(p.doc);
            }
            acc.scores[p.doc] += w;
        }
    }

    std::vector<ScoredPassage> candidates;
    candidates.reserve(acc.touched.size());
    for (const auto doc : acc.touched) {
        if (acc.scores[doc] > 0.0) {
            candidates.push_back({pids_[doc], acc.scores[doc], 0});
        }
        acc.scores[doc] = 0.0;
    }
    return take_top(std::move(candidates), k);
}

void InvertedIndex::save(std::ostream& out) const {
    out.write(kMagic, sizeof(kMagic));
    put<uint32_t>(out, kSnapshotVersion);
    put<double>(out, params_.k1);
    put<double>(out, params_.b);
    put<uint64_t>(out, pids_.size());
    for (size_t i = 0; i < pids_.size(); ++i) {
        put_string(out, pids_[i]);
        put<uint32_t>(out, doc_lengths_[i]);
    }
    const auto sorted_terms = terms();
    put<uint64_t>(out, sorted_terms.size());
    for (const auto& term : sorted_terms) {
        put_string(out, term);
        const auto& list = postings_[term_ids_.at(term)];
        put<uint64_t>(out, list.size());
        for (const auto& p : list) {
            put<uint32_t>(out, p.doc);
            put<uint32_t>(out, p.tf);
        }
    }
    if (!out) {
        throw Error("failed to write index snapshot");
    }
}

void InvertedIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(fmt::format("cannot open '{}' for writing", path.string()));
    }
    save(out);
}

InvertedIndex InvertedIndex::load(std::istream& in) {
    char magic[sizeof(kMagic)];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw InputError("not an index snapshot (bad magic)");
    }
    const auto version = get<uint32_t>(in);
    if (version != kSnapshotVersion) {
        throw InputError(fmt::format("unsupported index snapshot version {} (expected {})", version,
                                     kSnapshotVersion));
    }
    InvertedIndex index;
    index.params_.k1 = get<double>(in);
    index.params_.b = get<double>(in);
    check_params(index.params_);
    const auto n = get<uint64_t>(in);
    if (n == 0 || n > std::numeric_limits<uint32_t>::max()) {
        throw InputError("index snapshot has an invalid document count");
    }
    index.pids_.reserve(n);
    index.doc_lengths_.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        index.pids_.push_back(get_string(in));
        index.doc_lengths_.push_back(get<uint32_t>(in));
    }
    const auto vocab = get<uint64_t>(in);
    index.postings_.reserve(vocab);
    for (uint64_t t = 0; t < vocab; ++t) {
        auto term = get_string(in);
        const auto count = get<uint64_t>(in);
        std::vector<Posting> list;
        list.reserve(count);
        for (uint64_t i = 0; i < count; ++i) {
            const auto doc = get<uint32_t>(in);
            const auto tf = get<uint32_t>(in);
            if (doc >= n || tf == 0 || (!list.empty() && doc <= list.back().doc)) {
                throw InputError(fmt::format("index snapshot has a corrupt postings list for '{}'", term));
            }
            list.push_back({doc, tf});
        }
        index.term_ids_.emplace(std::move(term), static_cast<uint32_t>(index.postings_.size()));
        index.postings_.push_back(std::move(list));
    }
    index.finalize();
    return index;
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(fmt::format("cannot open '{}'", path.string()));
    }
    return load(in);
}

std::vector<ScoredPassage> exhaustive_search(const Corpus& corpus, std::string_view query_text, size_t k,
                                             Bm25Params params) {
    check_params(params);
    if (k == 0) {
        throw PreconditionError("search requires k >= 1");
    }
    const auto query = distinct_query_terms(query_text);
    if (corpus.empty() || query.empty()) {
        return {};
    }

    // Plain per-document term counts, computed from scratch.
    std::vector<std::unordered_map<std::string, uint32_t>> counts(corpus.size());
    std::vector<double> lengths(corpus.size());
    double total_len = 0.0;
    for (size_t d = 0; d < corpus.size(); ++d) {
        const auto tokens = tokenize(corpus[d].text);
        for (const auto& t : tokens) {
            ++counts[d][t];
        }
        lengths[d] = static_cast<double>(tokens.size());
        total_len += lengths[d];
    }
    const double n = static_cast<double>(corpus.size());
    const double avgdl = total_len / n;

    std::vector<double> idf;
    for (const auto& term : query) {
        double df = 0.0;
        for (const auto& c : counts) {
            df += c.count(term) ? 1.0 : 0.0;
        }
        idf.push_back(std::log(1.0 + (n - df + 0.5) / (df + 0.5)));
    }

    std::vector<ScoredPassage> candidates;
    for (size_t d = 0; d < corpus.size(); ++d) {
        double s = 0.0;
        for (size_t i = 0; i < query.size(); ++i) {
            const auto it = counts[d].find(query[i]);
            if (it == counts[d].end()) {
                continue;
            }
            const double tf = it->second;
            s += idf[i] * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * lengths[d] / avgdl));
        }
        if (s > 0.0) {
            candidates.push_back({corpus[d].pid, s, 0});
        }
    }
    return take_top(std::move(candidates), k);
}

}  // namespace verifact
