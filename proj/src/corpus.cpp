// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include "verifact/corpus.hpp"

#include <fstream>
#include <istream>
#include <unordered_set>

#include <fmt/format.h>

#include "verifact/error.hpp"
#include "verifact/text.hpp"

namespace verifact {

namespace {

struct TsvRecord {
    std::string id;
    std::string text;
};

enum class TabPolicy { FirstTabSplits, ExactlyTwoFields };

template <typename Fn>
void read_tsv(std::istream& in, std::string_view source, TabPolicy policy, Fn&& emit) {
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
        if (!is_valid_utf8(line)) {
            throw InputError(fmt::format("{}:{}: invalid UTF-8", source, line_no));
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw InputError(fmt::format("{}:{}: malformed line, expected 2 tab-separated fields", source, line_no));
        }
        if (policy == TabPolicy::ExactlyTwoFields && line.find('\t', tab + 1) != std::string::npos) {
            throw InputError(fmt::format("{}:{}: malformed line, expected 2 tab-separated fields", source, line_no));
        }
        TsvRecord rec{line.substr(0, tab), line.substr(tab + 1)};
        if (trim(rec.id).empty()) {
            throw InputError(fmt::format("{}:{}: empty identifier", source, line_no));
        }
        if (trim(rec.text).empty()) {
            throw InputError(fmt::format("{}:{}: empty text for '{}'", source, line_no, rec.id));
        }
        emit(std::move(rec), line_no);
    }
    if (in.bad()) {
        throw InputError(fmt::format("{}: read error", source));
    }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(fmt::format("cannot open '{}'", path.string()));
    }
    return in;
}

}  // namespace

Corpus::Corpus(std::vector<Passage> passages) : passages_(std::move(passages)) {
    lookup_.reserve(passages_.size());
    for (size_t i = 0; i < passages_.size(); ++i) {
        if (passages_[i].pid.empty()) {
            throw InputError(fmt::format("passage at position {} has an empty pid", i));
        }
        if (!lookup_.emplace(passages_[i].pid, i).second) {
            throw InputError(fmt::format("duplicate pid '{}'", passages_[i].pid));
        }
    }
}

size_t Corpus::ordinal_of(std::string_view pid) const {
    const auto it = lookup_.find(std::string(pid));
    return it == lookup_.end() ? passages_.size() : it->second;
}

const Passage* Corpus::find(std::string_view pid) const {
    const size_t ord = ordinal_of(pid);
    return ord == passages_.size() ? nullptr : &passages_[ord];
}

Corpus parse_collection(std::istream& in, std::string_view source) {
    std::vector<Passage> passages;
    std::unordered_set<std::string> seen;
    read_tsv(in, source, TabPolicy::FirstTabSplits, [&](TsvRecord rec, size_t line_no) {
        if (!seen.insert(rec.id).second) {
            throw InputError(fmt::format("{}:{}: duplicate pid '{}'", source, line_no, rec.id));
        }
        passages.push_back({std::move(rec.id), std::move(rec.text)});
    });
    return Corpus(std::move(passages));
}

Corpus load_collection(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_collection(in, path.string());
}

std::vector<Question> parse_queries(std::istream& in, std::string_view source) {
    std::vector<Question> questions;
    std::unordered_set<std::string> seen;
    read_tsv(in, source, TabPolicy::ExactlyTwoFields, [&](TsvRecord rec, size_t line_no) {
        if (!seen.insert(rec.id).second) {
            throw InputError(fmt::format("{}:{}: duplicate qid '{}'", source, line_no, rec.id));
        }
        questions.push_back({std::move(rec.id), std::move(rec.text)});
    });
    return questions;
}

std::vector<Question> load_queries(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_queries(in, path.string());
}

}  // namespace verifact
