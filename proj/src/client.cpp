// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include "verifact/client.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "verifact/hash.hpp"
#include "verifact/text.hpp"

namespace verifact {

using json = nlohmann::json;

void CompletionParams::validate() const {
    if (!(temperature >= 0.0)) {
        throw PreconditionError(fmt::format("temperature must be >= 0, got {}", temperature));
    }
    if (max_in_flight < 1) {
        throw PreconditionError(fmt::format("max_in_flight must be >= 1, got {}", max_in_flight));
    }
    if (retry_limit < 0) {
        throw PreconditionError(fmt::format("retry_limit must be >= 0, got {}", retry_limit));
    }
    if (model_id.empty()) {
        throw PreconditionError("model id must not be empty");
    }
}

// Holds one of the client's max_in_flight slots for the duration of an attempt.
class LlmClient::Slot {
public:
    explicit Slot(LlmClient& client) : client_(client) {
        std::unique_lock lock(client_.mutex_);
        client_.slot_freed_.wait(lock, [this] { return client_.in_flight_ < client_.params_.max_in_flight; });
        ++client_.in_flight_;
    }
    ~Slot() {
        {
            std::lock_guard lock(client_.mutex_);
            --client_.in_flight_;
        }
        client_.slot_freed_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    LlmClient& client_;
};

LlmClient::LlmClient(std::shared_ptr<ChatBackend> backend, CompletionParams params)
    : backend_(std::move(backend)), params_(std::move(params)) {
    if (!backend_) {
        throw PreconditionError("LlmClient requires a backend");
    }
    params_.validate();
}

std::string LlmClient::complete(const PromptText& prompt) {
    std::string last_error;
    for (int attempt = 0; attempt <= params_.retry_limit; ++attempt) {
        if (attempt > 0) {
            const auto factor = std::ldexp(1.0, attempt - 1);
            const auto delay = std::min<double>(static_cast<double>(params_.backoff_initial.count()) * factor,
                                                static_cast<double>(params_.backoff_max.count()));
            std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(delay)));
        }
        try {
            Slot slot(*this);
            return backend_->send(prompt, params_);
        } catch (const TransientError& e) {
            last_error = e.what();
        }
    }
    throw RetryExhausted(fmt::format("{} prompt failed after {} attempts: {}", to_string(prompt.template_id),
                                     params_.retry_limit + 1, last_error));
}

std::string prompt_hash(std::string_view prompt_text) {
    return sha256_hex(prompt_text);
}

namespace {

TemplateId template_from_name(std::string_view name, std::string_view where) {
    if (name == "answer") return TemplateId::Answer;
    if (name == "reader") return TemplateId::Reader;
    if (name == "classify") return TemplateId::Classify;
    throw InputError(fmt::format("{}: unknown template '{}'", where, name));
}

}  // namespace

std::shared_ptr<MockBackend> MockBackend::from_transcript(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(fmt::format("cannot open mock transcript '{}'", path.string()));
    }
    auto mock = std::make_shared<MockBackend>();
    mock->load_transcript(in, path.string());
    return mock;
}

void MockBackend::load_transcript(std::istream& in, std::string_view source) {
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto where = fmt::format("{}:{}", source, line_no);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw InputError(fmt::format("{}: {}", where, e.what()));
        }
        if (!obj.is_object() || !obj.contains("response")) {
            throw InputError(fmt::format("{}: transcript record needs a \"response\"", where));
        }
        std::vector<std::string> responses;
        const auto& r = obj["response"];
        if (r.is_string()) {
            responses.push_back(r.get<std::string>());
        } else if (r.is_array() && !r.empty() &&
                   std::all_of(r.begin(), r.end(), [](const json& v) { return v.is_string(); })) {
            responses = r.get<std::vector<std::string>>();
        } else {
            throw InputError(fmt::format("{}: \"response\" must be a string or non-empty string array", where));
        }

        std::lock_guard lock(mutex_);
        if (obj.contains("hash") && obj["hash"].is_string()) {
            entries_[obj["hash"].get<std::string>()] = Entry{std::move(responses)};
        } else if (obj.contains("prompt") && obj["prompt"].is_string()) {
            entries_[prompt_hash(obj["prompt"].get<std::string>())] = Entry{std::move(responses)};
        } else if (obj.contains("template") && obj["template"].is_string()) {
            defaults_[template_from_name(obj["template"].get<std::string>(), where)] = responses.front();
        } else {
            throw InputError(fmt::format("{}: transcript record needs \"hash\", \"prompt\" or \"template\"", where));
        }
    }
}

void MockBackend::save_transcript(std::ostream& out) const {
    std::lock_guard lock(mutex_);
    for (const auto& [hash, entry] : entries_) {
        json obj;
        obj["hash"] = hash;
        if (entry.responses.size() == 1) {
            obj["response"] = entry.responses.front();
        } else {
            obj["response"] = entry.responses;
        }
        out << obj.dump() << '\n';
    }
    for (const auto& [id, response] : defaults_) {
        json obj;
        obj["template"] = std::string(to_string(id));
        obj["response"] = response;
        out << obj.dump() << '\n';
    }
}

void MockBackend::script(std::string_view prompt_text, std::string response) {
    script_hash(prompt_hash(prompt_text), std::move(response));
}

void MockBackend::script_sequence(std::string_view prompt_text, std::vector<std::string> responses) {
    if (responses.empty()) {
        throw PreconditionError("script_sequence needs at least one response");
    }
    std::lock_guard lock(mutex_);
    entries_[prompt_hash(prompt_text)] = Entry{std::move(responses)};
}

void MockBackend::script_hash(std::string hash, std::string response) {
    std::lock_guard lock(mutex_);
    entries_[std::move(hash)] = Entry{{std::move(response)}};
}

void MockBackend::script_default(TemplateId id, std::string response) {
    std::lock_guard lock(mutex_);
    defaults_[id] = std::move(response);
}

void MockBackend::fail_next(std::string_view prompt_text, int times, Failure kind) {
    std::lock_guard lock(mutex_);
    failures_[prompt_hash(prompt_text)] = Pending{times, kind};
}

void MockBackend::set_latency(std::chrono::milliseconds latency) {
    std::lock_guard lock(mutex_);
    latency_ = latency;
}

std::string MockBackend::send(const PromptText& prompt, const CompletionParams& /*params*/) {
    const auto hash = prompt_hash(prompt.text);
    std::chrono::milliseconds latency{0};
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        ++calls_by_template_[static_cast<size_t>(prompt.template_id)];
        ++in_flight_;
        peak_in_flight_ = std::max(peak_in_flight_, in_flight_);
        latency = latency_;
    }
    if (latency.count() > 0) {
        std::this_thread::sleep_for(latency);
    }

    std::lock_guard lock(mutex_);
    --in_flight_;
    if (auto it = failures_.find(hash); it != failures_.end() && it->second.remaining > 0) {
        --it->second.remaining;
        switch (it->second.kind) {
            case Failure::Transient: throw TransientError("mock: scripted transient failure");
            case Failure::Timeout: throw TimeoutError("mock: scripted timeout");
            case Failure::Auth: throw AuthError("mock: scripted authentication failure");
            case Failure::Malformed: throw MalformedResponse("mock: scripted malformed response");
        }
    }
    if (auto it = entries_.find(hash); it != entries_.end()) {
        auto& entry = it->second;
        const auto& response = entry.responses[std::min(entry.next, entry.responses.size() - 1)];
        if (entry.next < entry.responses.size()) {
            ++entry.next;
        }
        return response;
    }
    if (auto it = defaults_.find(prompt.template_id); it != defaults_.end()) {
        return it->second;
    }
    throw UnscriptedPrompt(
        fmt::format("mock: unscripted {} prompt (hash {})", to_string(prompt.template_id), hash));
}

size_t MockBackend::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

size_t MockBackend::calls_for(TemplateId id) const {
    std::lock_guard lock(mutex_);
    return calls_by_template_[static_cast<size_t>(id)];
}

size_t MockBackend::peak_in_flight() const {
    std::lock_guard lock(mutex_);
    return peak_in_flight_;
}

void MockBackend::reset_stats() {
    std::lock_guard lock(mutex_);
    calls_ = 0;
    calls_by_template_ = {};
    peak_in_flight_ = in_flight_;
}

std::string api_key_from_env() {
    const char* key = std::getenv(std::string(kApiKeyEnv).c_str());
    if (key == nullptr || *key == '\0') {
        throw AuthError(fmt::format(
            "no API credential: set {} to your chat-completion API key, or pass --mock <transcript>", kApiKeyEnv));
    }
    return key;
}

}  // namespace verifact
