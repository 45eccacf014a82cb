// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace verifact {

/// Classifier verdict on (question, LLM answer, retrieved answer).
///  Yes        - the evidence supports the generated answer.
///  No         - the evidence contradicts it (a hallucination).
///  NotRelated - neither answer addresses the question.
enum class VerificationLabel { Yes, No, NotRelated };

/// "Yes", "No" or "Not Related".
std::string_view to_string(VerificationLabel label) noexcept;

/// Maps a classifier response onto a label.
///
/// Only the first non-blank line is considered. It is trimmed, surrounding
/// double quotes and trailing `.`, `!` are stripped, inner whitespace runs are
/// collapsed, and the result is compared case-insensitively against
/// "not related", "yes" and "no" (in that order). The whole line must match.
/// std::nullopt means the reply ignored the format instruction.
std::optional<VerificationLabel> parse_label(std::string_view response);

}  // namespace verifact
