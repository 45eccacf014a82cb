// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include "verifact/prompts.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "verifact/builtin_prompts.hpp"
#include "verifact/error.hpp"
#include "verifact/hash.hpp"

namespace verifact {

namespace {

using Binding = std::pair<std::string_view, std::string_view>;

std::string substitute(std::string_view tmpl, std::initializer_list<Binding> bindings) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find('{', pos);
        if (open == std::string_view::npos) {
            break;
        }
        const auto close = tmpl.find('}', open);
        if (close == std::string_view::npos) {
            break;
        }
        const auto name = tmpl.substr(open + 1, close - open - 1);
        const Binding* hit = nullptr;
        for (const auto& b : bindings) {
            if (b.first == name) {
                hit = &b;
            }
        }
        if (hit == nullptr) {
            out.append(tmpl.substr(pos, open + 1 - pos));
            pos = open + 1;
            continue;
        }
        out.append(tmpl.substr(pos, open - pos));
        out.append(hit->second);
        pos = close + 1;
    }
    out.append(tmpl.substr(pos));
    return out;
}

void require_nonempty(std::string_view value, std::string_view what) {
    if (value.empty()) {
        throw PreconditionError(fmt::format("{} must not be empty", what));
    }
}

std::string read_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(fmt::format("cannot open prompt template '{}'", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    auto text = buf.str();
    if (!text.empty() && text.back() == '\n') {
        text.pop_back();
    }
    return text;
}

}  // namespace

std::string_view to_string(TemplateId id) noexcept {
    switch (id) {
        case TemplateId::Answer: return "answer";
        case TemplateId::Reader: return "reader";
        case TemplateId::Classify: return "classify";
    }
    return "unknown";
}

const PromptTemplates& PromptTemplates::builtin() {
    static const PromptTemplates templates{builtin_prompts::kAnswer, builtin_prompts::kReader,
                                           builtin_prompts::kClassify};
    return templates;
}

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir) {
    return {read_template(dir / "answer.txt"), read_template(dir / "reader.txt"),
            read_template(dir / "classify.txt")};
}

std::string PromptTemplates::fingerprint() const {
    std::string joined;
    for (const auto* t : {&answer, &reader, &classify}) {
        joined += fmt::format("{}:{}\n", t->size(), *t);
    }
    return sha256_hex(joined).substr(0, 16);
}

PromptText render_answer_prompt(std::string_view question, const PromptTemplates& templates) {
    require_nonempty(question, "question");
    return {substitute(templates.answer, {{"query", question}}), TemplateId::Answer};
}

PromptText render_reader_prompt(std::string_view question, std::string_view passage,
                                const PromptTemplates& templates) {
    require_nonempty(question, "question");
    require_nonempty(passage, "passage");
    return {substitute(templates.reader, {{"query", question}, {"passage", passage}}), TemplateId::Reader};
}

PromptText render_classify_prompt(std::string_view question, std::string_view llm_answer,
                                  std::string_view retrieved_answer, const PromptTemplates& templates) {
    require_nonempty(question, "question");
    require_nonempty(llm_answer, "LLM answer");
    require_nonempty(retrieved_answer, "retrieved answer");
    return {substitute(templates.classify,
                       {{"query", question}, {"LLM_answer", llm_answer}, {"Retriever_answer", retrieved_answer}}),
            TemplateId::Classify};
}

}  // namespace verifact
