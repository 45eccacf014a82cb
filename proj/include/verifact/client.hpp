// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "verifact/error.hpp"
#include "verifact/prompts.hpp"

namespace verifact {

inline constexpr std::string_view kApiKeyEnv = "VERIFACT_API_KEY";
inline constexpr std::string_view kDefaultModel = "gpt-3.5-turbo";
inline constexpr std::string_view kDefaultEndpoint = "https://api.openai.com/v1/chat/completions";

struct CompletionParams {
    std::string model_id{kDefaultModel};
    double temperature = 0.0;
    int max_in_flight = 4;
    int retry_limit = 3;  // retries after the first attempt
    std::chrono::milliseconds timeout{60'000};
    std::chrono::milliseconds backoff_initial{500};
    std::chrono::milliseconds backoff_max{30'000};

    /// Throws PreconditionError on a negative temperature, max_in_flight < 1
    /// or retry_limit < 0.
    void validate() const;
};

class LlmError : public Error {
public:
    using Error::Error;
};

/// Rejected credential. Never retried.
class AuthError : public LlmError {
public:
    using LlmError::LlmError;
};

/// Connection failures, rate limiting, 5xx. Retried with backoff.
class TransientError : public LlmError {
public:
    using LlmError::LlmError;
};

class TimeoutError : public TransientError {
public:
    using TransientError::TransientError;
};

/// The endpoint answered with something that is not a chat completion.
class MalformedResponse : public LlmError {
public:
    using LlmError::LlmError;
};

class RetryExhausted : public LlmError {
public:
    using LlmError::LlmError;
};

/// The mock has no transcript entry for a prompt.
class UnscriptedPrompt : public LlmError {
public:
    using LlmError::LlmError;
};

/// One attempt at a single-message chat completion. Implementations must be
/// safe to call from several threads at once.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string send(const PromptText& prompt, const CompletionParams& params) = 0;
};

/// Shared front end for a backend. Bounds outstanding calls to
/// params.max_in_flight across all callers and retries TransientError with
/// exponential backoff.
class LlmClient {
public:
    LlmClient(std::shared_ptr<ChatBackend> backend, CompletionParams params);

    LlmClient(const LlmClient&) = delete;
    LlmClient& operator=(const LlmClient&) = delete;

    std::string complete(const PromptText& prompt);

    const CompletionParams& params() const noexcept { return params_; }
    ChatBackend& backend() noexcept { return *backend_; }

private:
    class Slot;

    std::shared_ptr<ChatBackend> backend_;
    CompletionParams params_;
    std::mutex mutex_;
    std::condition_variable slot_freed_;
    int in_flight_ = 0;
};

/// Key under which the mock looks a prompt up.
std::string prompt_hash(std::string_view prompt_text);

/// Deterministic stand-in for a chat endpoint, driven by a transcript.
///
/// Lookup order for a prompt: exact entry by prompt hash, then a per-template
/// default, else UnscriptedPrompt. Transcript files hold one JSON object per
/// line with a "response" (string, or array consumed in order with the last
/// element repeating) and one key among:
///   "hash"     - prompt_hash() of the rendered prompt
///   "prompt"   - the rendered prompt itself (hashed on load)
///   "template" - "answer" | "reader" | "classify" default
class MockBackend : public ChatBackend {
public:
    enum class Failure { Transient, Timeout, Auth, Malformed };

    MockBackend() = default;

    static std::shared_ptr<MockBackend> from_transcript(const std::filesystem::path& path);
    void load_transcript(std::istream& in, std::string_view source = "<stream>");
    void save_transcript(std::ostream& out) const;

    void script(std::string_view prompt_text, std::string response);
    void script_sequence(std::string_view prompt_text, std::vector<std::string> responses);
    void script_hash(std::string hash, std::string response);
    void script_default(TemplateId id, std::string response);

    /// The next `times` calls with this prompt fail with `kind` before the
    /// transcript is consulted.
    void fail_next(std::string_view prompt_text, int times, Failure kind = Failure::Transient);

    /// Simulated service time, to make overlapping calls observable.
    void set_latency(std::chrono::milliseconds latency);

    std::string send(const PromptText& prompt, const CompletionParams& params) override;

    size_t calls() const;
    size_t calls_for(TemplateId id) const;
    size_t peak_in_flight() const;
    void reset_stats();

private:
    struct Entry {
        std::vector<std::string> responses;
        size_t next = 0;
    };
    struct Pending {
        int remaining = 0;
        Failure kind = Failure::Transient;
    };

    mutable std::mutex mutex_;
    std::map<std::string, Entry> entries_;
    std::map<TemplateId, std::string> defaults_;
    std::map<std::string, Pending> failures_;
    std::chrono::milliseconds latency_{0};
    size_t calls_ = 0;
    std::array<size_t, 3> calls_by_template_{};
    size_t in_flight_ = 0;
    size_t peak_in_flight_ = 0;
};

struct HttpBackendConfig {
    std::string endpoint{kDefaultEndpoint};
    std::string api_key;
};

/// OpenAI-style chat-completions endpoint. The whole rendered prompt goes out
/// as one user message.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(HttpBackendConfig config);
    std::string send(const PromptText& prompt, const CompletionParams& params) override;

private:
    HttpBackendConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

/// Value of VERIFACT_API_KEY. Throws AuthError naming the variable when unset.
std::string api_key_from_env();

}  // namespace verifact
