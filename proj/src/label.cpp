// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include "verifact/label.hpp"

#include <array>
#include <utility>

#include "verifact/text.hpp"

namespace verifact {

namespace {

std::string normalize_first_line(std::string_view response) {
    auto text = trim(response);
    text = text.substr(0, text.find('\n'));
    text = trim(text);

    constexpr std::string_view kTrailing = ".!\" \t\r";
    while (!text.empty() && kTrailing.find(text.back()) != std::string_view::npos) {
        text.remove_suffix(1);
    }
    while (!text.empty() && (text.front() == '"' || text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }

    std::string out;
    out.reserve(text.size());
    bool in_space = false;
    for (const char c : text) {
        if (c == ' ' || c == '\t') {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) {
            out.push_back(' ');
        }
        in_space = false;
        out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c);
    }
    return out;
}

}  // namespace

std::string_view to_string(VerificationLabel label) noexcept {
    switch (label) {
        case VerificationLabel::Yes: return "Yes";
        case VerificationLabel::No: return "No";
        case VerificationLabel::NotRelated: return "Not Related";
    }
    return "?";
}

std::optional<VerificationLabel> parse_label(std::string_view response) {
    // Longest first, so "not related" can never be read as "no".
    static constexpr std::array<std::pair<std::string_view, VerificationLabel>, 3> kRules{{
        {"not related", VerificationLabel::NotRelated},
        {"yes", VerificationLabel::Yes},
        {"no", VerificationLabel::No},
    }};
    const auto normalized = normalize_first_line(response);
    for (const auto& [form, label] : kRules) {
        if (normalized == form) {
            return label;
        }
    }
    return std::nullopt;
}

}  // namespace verifact
