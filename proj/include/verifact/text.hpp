// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace verifact {

/// True iff `text` is well-formed UTF-8 (no overlongs, surrogates or code
/// points above U+10FFFF).
bool is_valid_utf8(std::string_view text) noexcept;

/// Lowercased terms obtained by splitting on every maximal run of
/// non-alphanumeric code points. Alphanumeric means Unicode letter or digit.
/// Invalid UTF-8 bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

/// Strips ASCII whitespace from both ends.
std::string_view trim(std::string_view text) noexcept;

}  // namespace verifact
