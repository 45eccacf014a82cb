// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <fmt/format.h>
#include <json.hpp>

#include "verifact/client.hpp"

namespace verifact {

using json = nlohmann::json;

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw PreconditionError(fmt::format("endpoint '{}' must start with http:// or https://", config_.endpoint));
    }
    const auto scheme = config_.endpoint.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw PreconditionError(fmt::format("unsupported endpoint scheme '{}'", scheme));
    }
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    scheme_host_port_ = config_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
}

std::string HttpChatBackend::send(const PromptText& prompt, const CompletionParams& params) {
    httplib::Client cli(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(params.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(params.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    if (!config_.api_key.empty()) {
        cli.set_bearer_token_auth(config_.api_key);
    }

    const json body = {
        {"model", params.model_id},
        {"temperature", params.temperature},
        {"messages", json::array({{{"role", "user"}, {"content", prompt.text}}})},
    };
    const auto res = cli.Post(path_, body.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        const auto msg = fmt::format("{}: {}", config_.endpoint, httplib::to_string(err));
        if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
            throw TimeoutError(msg);
        }
        throw TransientError(msg);
    }

    const int status = res->status;
    if (status == 401 || status == 403) {
        throw AuthError(fmt::format("{}: authentication failed (HTTP {})", config_.endpoint, status));
    }
    if (status == 408 || status == 409 || status == 429 || status >= 500) {
        throw TransientError(fmt::format("{}: HTTP {}", config_.endpoint, status));
    }
    if (status != 200) {
        throw LlmError(fmt::format("{}: request rejected (HTTP {}): {}", config_.endpoint, status,
                                   res->body.substr(0, 200)));
    }

    try {
        const auto reply = json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw MalformedResponse(fmt::format("{}: not a chat completion: {}", config_.endpoint, e.what()));
    }
}

}  // namespace verifact
