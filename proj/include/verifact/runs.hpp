// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "verifact/corpus.hpp"
#include "verifact/index.hpp"
#include "verifact/retrieval.hpp"

namespace verifact {

/// One line of a TREC run: `qid Q0 pid rank score tag`.
struct RunEntry {
    std::string qid;
    std::string pid;
    int rank = 0;
    double score = 0.0;
    std::string tag;

    friend bool operator==(const RunEntry&, const RunEntry&) = default;
};

/// A validated run: per qid, ranks are 1..n and scores never increase.
struct RunTable {
    std::string tag;
    std::map<std::string, std::vector<RunEntry>> entries;

    const std::vector<RunEntry>* find(std::string_view qid) const;
    size_t size() const noexcept;  // total entries
};

/// Strict parse. Throws InputError on a malformed line, a rank gap, an
/// increasing score, a duplicate (qid, pid) or mixed run tags.
RunTable parse_run(std::istream& in, std::string_view source = "<stream>");
RunTable parse_run_file(const std::filesystem::path& path);

/// Ranked results per qid, as produced by InvertedIndex::search.
using RunResults = std::map<std::string, std::vector<ScoredPassage>>;

/// Scores are printed with 6 significant digits.
std::string format_run_score(double score);

void serialize_run(std::ostream& out, const RunResults& results, std::string_view tag);
void serialize_run(const std::filesystem::path& path, const RunResults& results, std::string_view tag);

/// Rank-1 entry for `qid` resolved against the corpus.
RetrievalResult run_retriever(const RunTable& table, const Corpus& corpus, std::string_view qid);

/// Retriever backed by a precomputed run, keyed by qid (the combined-query
/// text is ignored: the run was produced from it offline).
class RunRetriever final : public Retriever {
public:
    RunRetriever(RunTable table, const Corpus& corpus);

    const std::string& id() const noexcept override { return table_.tag; }
    RetrievalResult retrieve(const CombinedQuery& query) const override;
    std::string fingerprint() const override;

private:
    RunTable table_;
    const Corpus& corpus_;
};

}  // namespace verifact
