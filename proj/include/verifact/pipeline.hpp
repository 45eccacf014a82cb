// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "verifact/client.hpp"
#include "verifact/corpus.hpp"
#include "verifact/label.hpp"
#include "verifact/prompts.hpp"
#include "verifact/retrieval.hpp"

namespace verifact {

/// Final state of a record: the three classifier labels plus the states that
/// keep every question in the denominator.
enum class Outcome { Yes, No, NotRelated, Unparseable, NoEvidence, Error };

inline constexpr size_t kOutcomeCount = 6;

/// "Yes", "No", "Not Related", "Unparseable", "NoEvidence", "Error".
std::string_view to_string(Outcome outcome) noexcept;
std::optional<Outcome> outcome_from_string(std::string_view text) noexcept;
Outcome to_outcome(VerificationLabel label) noexcept;
/// nullopt for Unparseable, NoEvidence and Error.
std::optional<VerificationLabel> as_label(Outcome outcome) noexcept;

struct GeneratedAnswer {
    std::string qid;
    std::string text;
    std::string model_id;
    double temperature = 0.0;

    friend bool operator==(const GeneratedAnswer&, const GeneratedAnswer&) = default;
};

/// One question's trace through the pipeline.
struct VerificationRecord {
    std::string qid;
    std::string question;
    std::optional<GeneratedAnswer> answer;
    std::optional<Evidence> evidence;
    std::string compared;  // text shown to the classifier as Answer2
    Outcome label = Outcome::Error;
    std::string raw;  // classifier reply, verbatim
    std::string retriever_id;
    std::string diagnostic;   // why there is no evidence
    std::string error_stage;  // "answer" | "retrieve" | "reader" | "classify" when label == Error
    std::string error;

    friend bool operator==(const VerificationRecord&, const VerificationRecord&) = default;
};

/// Single-line JSON with the stable field names qid, question, answer, pid,
/// passage, reader_answer, compared, label, raw, retriever_id (plus model,
/// temperature, score, diagnostic, stage, error).
std::string to_json_line(const VerificationRecord& record);
VerificationRecord record_from_json_line(std::string_view line, std::string_view where = "<record>");

std::vector<VerificationRecord> read_records(const std::filesystem::path& path);
/// Writes to a sibling temp file and renames it into place.
void write_records(const std::filesystem::path& path, std::span<const VerificationRecord> records);

/// Generated answers keyed by qid and generation settings, so several
/// retriever configurations verify the same answers. Optionally persisted as
/// JSON lines. Thread-safe.
class AnswerCache {
public:
    AnswerCache() = default;
    explicit AnswerCache(std::filesystem::path path);

    std::optional<GeneratedAnswer> find(std::string_view qid, std::string_view key) const;
    void store(const GeneratedAnswer& answer, std::string_view key);
    size_t size() const;

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, GeneratedAnswer> answers_;
};

enum class QueryOrder { QuestionFirst, AnswerFirst };

struct VerifyConfig {
    const Retriever* retriever = nullptr;
    bool reader_enabled = false;
    LlmClient* client = nullptr;
    PromptTemplates templates = PromptTemplates::builtin();
    AnswerCache* answers = nullptr;
    QueryOrder query_order = QueryOrder::QuestionFirst;

    /// Digest of everything that can change a record; keys the resume journal.
    std::string fingerprint() const;
};

/// Raw completion of the answer prompt. A refusal is still an answer.
GeneratedAnswer generate_answer(LlmClient& client, const Question& question,
                                const PromptTemplates& templates = PromptTemplates::builtin());

RetrievalResult retrieve_evidence(const Retriever& retriever, const CombinedQuery& query);

/// Raw completion of the reader prompt; not validated against the passage.
std::string extract_reader_answer(LlmClient& client, std::string_view question, std::string_view passage,
                                  const PromptTemplates& templates = PromptTemplates::builtin());

struct Classification {
    Outcome label = Outcome::Unparseable;  // Yes, No, NotRelated or Unparseable
    std::string raw;
};

/// Answer1 = `generated`, Answer2 = `compared`. An unparseable reply is asked
/// again once; if that also fails the outcome is Unparseable with the second
/// reply as `raw`.
Classification classify(LlmClient& client, std::string_view question, std::string_view generated,
                        std::string_view compared, const PromptTemplates& templates = PromptTemplates::builtin());

/// generate -> combine -> retrieve -> (reader) -> classify. Never throws for
/// stage failures; they become an Error record naming the stage.
VerificationRecord verify_one(const Question& question, const VerifyConfig& config);

struct BatchOptions {
    int workers = 1;
    std::filesystem::path journal;  // empty: no persistence
    bool resume = false;
    std::stop_token stop;
    std::function<void(const VerificationRecord&)> on_record;
};

struct BatchResult {
    std::vector<VerificationRecord> records;  // input order; only completed ones when interrupted
    size_t resumed = 0;
    size_t computed = 0;
    bool complete = false;
};

/// Runs verify_one over `questions` on `options.workers` threads. Completed
/// records are appended to the journal as they finish; with `resume`, journal
/// records under the same config fingerprint are reused instead of recomputed
/// (Error records are always retried).
BatchResult verify_batch(std::span<const Question> questions, const VerifyConfig& config,
                         const BatchOptions& options);

}  // namespace verifact
