// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include "verifact/runs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "verifact/error.hpp"
#include "verifact/text.hpp"

namespace verifact {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> fields;
    size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) {
            ++pos;
        }
        const auto start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') {
            ++pos;
        }
        if (pos > start) {
            fields.push_back(line.substr(start, pos - start));
        }
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

const std::vector<RunEntry>* RunTable::find(std::string_view qid) const {
    const auto it = entries.find(std::string(qid));
    return it == entries.end() ? nullptr : &it->second;
}

size_t RunTable::size() const noexcept {
    size_t n = 0;
    for (const auto& [qid, list] : entries) {
        n += list.size();
    }
    return n;
}

RunTable parse_run(std::istream& in, std::string_view source) {
    RunTable table;
    bool have_tag = false;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_ws(line);
        if (fields.size() != 6) {
            throw InputError(fmt::format("{}:{}: expected 6 fields 'qid Q0 pid rank score tag', got {}", source,
                                         line_no, fields.size()));
        }
        RunEntry entry{std::string(fields[0]), std::string(fields[2]), 0, 0.0, std::string(fields[5])};
        if (!parse_number(fields[3], entry.rank) || entry.rank < 1) {
            throw InputError(fmt::format("{}:{}: bad rank '{}'", source, line_no, fields[3]));
        }
        if (!parse_number(fields[4], entry.score) || !std::isfinite(entry.score)) {
            throw InputError(fmt::format("{}:{}: bad score '{}'", source, line_no, fields[4]));
        }
        if (!have_tag) {
            table.tag = entry.tag;
            have_tag = true;
        } else if (entry.tag != table.tag) {
            throw InputError(fmt::format("{}:{}: run tag '{}' differs from '{}'", source, line_no, entry.tag,
                                         table.tag));
        }
        if (!seen.emplace(entry.qid, entry.pid).second) {
            throw InputError(fmt::format("{}:{}: duplicate entry for qid '{}' pid '{}'", source, line_no, entry.qid,
                                         entry.pid));
        }
        table.entries[entry.qid].push_back(std::move(entry));
    }
    if (in.bad()) {
        throw InputError(fmt::format("{}: read error", source));
    }

    for (auto& [qid, list] : table.entries) {
        std::sort(list.begin(), list.end(), [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
        for (size_t i = 0; i < list.size(); ++i) {
            if (list[i].rank != static_cast<int>(i + 1)) {
                throw InputError(fmt::format("{}: qid '{}' has a rank gap: expected rank {}, found {}", source, qid,
                                             i + 1, list[i].rank));
            }
            if (i > 0 && list[i].score > list[i - 1].score) {
                throw InputError(fmt::format("{}: qid '{}' score increases from rank {} to {}", source, qid, i,
                                             i + 1));
            }
        }
    }
    return table;
}

RunTable parse_run_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(fmt::format("cannot open run file '{}'", path.string()));
    }
    return parse_run(in, path.string());
}

std::string format_run_score(double score) {
    return fmt::format("{:.6g}", score);
}

void serialize_run(std::ostream& out, const RunResults& results, std::string_view tag) {
    if (tag.empty() || tag.find_first_of(" \t\n") != std::string_view::npos) {
        throw PreconditionError(fmt::format("run tag '{}' must be a single non-empty token", tag));
    }
    for (const auto& [qid, list] : results) {
        for (const auto& hit : list) {
            out << qid << " Q0 " << hit.pid << ' ' << hit.rank << ' ' << format_run_score(hit.score) << ' ' << tag
                << '\n';
        }
    }
    if (!out) {
        throw Error("failed to write run");
    }
}

void serialize_run(const std::filesystem::path& path, const RunResults& results, std::string_view tag) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(fmt::format("cannot open '{}' for writing", path.string()));
    }
    serialize_run(out, results, tag);
}

RetrievalResult run_retriever(const RunTable& table, const Corpus& corpus, std::string_view qid) {
    const auto* list = table.find(qid);
    if (list == nullptr || list->empty()) {
        return NoEvidence{fmt::format("qid '{}' not present in run '{}'", qid, table.tag)};
    }
    const auto& top = list->front();
    const auto* passage = corpus.find(top.pid);
    if (passage == nullptr) {
        return NoEvidence{fmt::format("corpus/run mismatch: run '{}' ranks pid '{}' first for qid '{}' but the "
                                      "corpus has no such passage",
                                      table.tag, top.pid, qid)};
    }
    return Evidence{passage->pid, passage->text, top.score, table.tag, std::nullopt};
}

RunRetriever::RunRetriever(RunTable table, const Corpus& corpus) : table_(std::move(table)), corpus_(corpus) {
    if (table_.tag.empty()) {
        table_.tag = "run";
    }
}

std::string RunRetriever::fingerprint() const {
    return fmt::format("run:{}:entries={}", table_.tag, table_.size());
}

RetrievalResult RunRetriever::retrieve(const CombinedQuery& query) const {
    return run_retriever(table_, corpus_, query.qid);
}

}  // namespace verifact
