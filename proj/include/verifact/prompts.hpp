// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace verifact {

enum class TemplateId { Answer, Reader, Classify };

std::string_view to_string(TemplateId id) noexcept;

struct PromptText {
    std::string text;
    TemplateId template_id = TemplateId::Answer;

    friend bool operator==(const PromptText&, const PromptText&) = default;
};

/// The three instruction templates. Placeholders are `{query}`, `{passage}`,
/// `{LLM_answer}` and `{Retriever_answer}`; substitution is single-pass, so
/// placeholder-like text inside substituted values is left alone.
struct PromptTemplates {
    std::string answer;
    std::string reader;
    std::string classify;

    /// Templates compiled in from prompts/*.txt.
    static const PromptTemplates& builtin();

    /// Reads answer.txt, reader.txt and classify.txt from `dir`. One trailing
    /// newline per file is dropped.
    static PromptTemplates load_dir(const std::filesystem::path& dir);

    /// Short stable digest of all three templates; part of resume keys.
    std::string fingerprint() const;
};

/// Throws PreconditionError for an empty question.
PromptText render_answer_prompt(std::string_view question,
                                const PromptTemplates& templates = PromptTemplates::builtin());

/// Throws PreconditionError for an empty question or passage.
PromptText render_reader_prompt(std::string_view question, std::string_view passage,
                                const PromptTemplates& templates = PromptTemplates::builtin());

/// `llm_answer` fills Answer1 and `retrieved_answer` fills Answer2.
PromptText render_classify_prompt(std::string_view question, std::string_view llm_answer,
                                  std::string_view retrieved_answer,
                                  const PromptTemplates& templates = PromptTemplates::builtin());

}  // namespace verifact
