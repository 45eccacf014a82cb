// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace verifact {

struct Passage {
    std::string pid;
    std::string text;

    friend bool operator==(const Passage&, const Passage&) = default;
};

struct Question {
    std::string qid;
    std::string text;

    friend bool operator==(const Question&, const Question&) = default;
};

/// Passage collection in file order. Ordinals (positions) are stable and are
/// what the inverted index refers to.
class Corpus {
public:
    Corpus() = default;

    /// Throws InputError on an empty or duplicate pid.
    explicit Corpus(std::vector<Passage> passages);

    size_t size() const noexcept { return passages_.size(); }
    bool empty() const noexcept { return passages_.empty(); }

    const Passage& operator[](size_t ordinal) const { return passages_[ordinal]; }
    std::span<const Passage> passages() const noexcept { return passages_; }
    auto begin() const noexcept { return passages_.begin(); }
    auto end() const noexcept { return passages_.end(); }

    /// Position of `pid`, or size() when absent.
    size_t ordinal_of(std::string_view pid) const;

    /// nullptr when `pid` was not loaded.
    const Passage* find(std::string_view pid) const;

    friend bool operator==(const Corpus& a, const Corpus& b) { return a.passages_ == b.passages_; }

private:
    std::vector<Passage> passages_;
    std::unordered_map<std::string, size_t> lookup_;
};

/// Reads `pid<TAB>text` lines. Text is everything after the first TAB, so it
/// may itself contain tabs. Blank lines are skipped.
Corpus load_collection(const std::filesystem::path& path);
Corpus parse_collection(std::istream& in, std::string_view source = "<stream>");

/// Reads `qid<TAB>text` lines; exactly two fields per line.
std::vector<Question> load_queries(const std::filesystem::path& path);
std::vector<Question> parse_queries(std::istream& in, std::string_view source = "<stream>");

/// Lookup by identifier; nullptr (not an error) when absent.
inline const Passage* get_passage(const Corpus& corpus, std::string_view pid) {
    return corpus.find(pid);
}

}  // namespace verifact
