// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include "verifact/pipeline.hpp"

#include <exception>

#include <fmt/format.h>

#include "verifact/hash.hpp"
#include "verifact/text.hpp"

namespace verifact {

std::string VerifyConfig::fingerprint() const {
    const auto& params = client ? client->params() : CompletionParams{};
    const auto canonical = fmt::format(
        "retriever={}\nreader={}\nmodel={}\ntemperature={}\ntemplates={}\norder={}\n",
        retriever ? retriever->fingerprint() : std::string("none"), reader_enabled, params.model_id,
        params.temperature, templates.fingerprint(), query_order == QueryOrder::QuestionFirst ? "qa" : "aq");
    return sha256_hex(canonical).substr(0, 16);
}

GeneratedAnswer generate_answer(LlmClient& client, const Question& question, const PromptTemplates& templates) {
    const auto prompt = render_answer_prompt(question.text, templates);
    auto text = client.complete(prompt);
    return {question.qid, std::move(text), client.params().model_id, client.params().temperature};
}

RetrievalResult retrieve_evidence(const Retriever& retriever, const CombinedQuery& query) {
    return retriever.retrieve(query);
}

std::string extract_reader_answer(LlmClient& client, std::string_view question, std::string_view passage,
                                  const PromptTemplates& templates) {
    return client.complete(render_reader_prompt(question, passage, templates));
}

Classification classify(LlmClient& client, std::string_view question, std::string_view generated,
                        std::string_view compared, const PromptTemplates& templates) {
    const auto prompt = render_classify_prompt(question, generated, compared, templates);
    Classification result;
    for (int ask = 0; ask < 2; ++ask) {
        result.raw = client.complete(prompt);
        if (const auto label = parse_label(result.raw)) {
            result.label = to_outcome(*label);
            return result;
        }
    }
    result.label = Outcome::Unparseable;
    return result;
}

namespace {

std::string answer_cache_key(const LlmClient& client, const PromptTemplates& templates, const Question& q) {
    return sha256_hex(fmt::format("{}\n{}\n{}\n{}", client.params().model_id, client.params().temperature,
                                  templates.answer, q.text))
        .substr(0, 16);
}

VerificationRecord fail(VerificationRecord record, std::string_view stage, std::string_view message) {
    record.label = Outcome::Error;
    record.error_stage = stage;
    record.error = message;
    return record;
}

}  // namespace

VerificationRecord verify_one(const Question& question, const VerifyConfig& config) {
    VerificationRecord record;
    record.qid = question.qid;
    record.question = question.text;
    if (config.retriever == nullptr || config.client == nullptr) {
        return fail(std::move(record), "config", "verify_one needs a retriever and a client");
    }
    record.retriever_id = config.retriever->id();
    auto& client = *config.client;

    try {
        const auto key = answer_cache_key(client, config.templates, question);
        std::optional<GeneratedAnswer> cached;
        if (config.answers != nullptr) {
            cached = config.answers->find(question.qid, key);
        }
        if (cached) {
            record.answer = std::move(*cached);
        } else {
            record.answer = generate_answer(client, question, config.templates);
            if (trim(record.answer->text).empty()) {
                return fail(std::move(record), "answer", "empty completion");
            }
            if (config.answers != nullptr) {
                config.answers->store(*record.answer, key);
            }
        }
    } catch (const std::exception& e) {
        return fail(std::move(record), "answer", e.what());
    }

    const auto combined = config.query_order == QueryOrder::QuestionFirst
                              ? combine_query(question.qid, question.text, record.answer->text)
                              : combine_query(question.qid, record.answer->text, question.text);

    try {
        auto result = retrieve_evidence(*config.retriever, combined);
        if (auto* none = std::get_if<NoEvidence>(&result)) {
            record.label = Outcome::NoEvidence;
            record.diagnostic = std::move(none->diagnostic);
            return record;
        }
        record.evidence = std::move(std::get<Evidence>(result));
    } catch (const std::exception& e) {
        return fail(std::move(record), "retrieve", e.what());
    }

    if (config.reader_enabled) {
        try {
            auto extracted = extract_reader_answer(client, question.text, record.evidence->passage_text,
                                                   config.templates);
            const bool empty = trim(extracted).empty();
            record.evidence->reader_answer = std::move(extracted);
            if (empty) {
                return fail(std::move(record), "reader", "empty completion");
            }
        } catch (const std::exception& e) {
            return fail(std::move(record), "reader", e.what());
        }
        record.compared = *record.evidence->reader_answer;
    } else {
        record.compared = record.evidence->passage_text;
    }

    try {
        auto verdict = classify(client, question.text, record.answer->text, record.compared, config.templates);
        record.label = verdict.label;
        record.raw = std::move(verdict.raw);
    } catch (const std::exception& e) {
        return fail(std::move(record), "classify", e.what());
    }
    return record;
}

}  // namespace verifact
