// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

// Exercises HttpChatBackend against a local server. Kept out of the main unit
// binary because httplib is slow to compile.

#include <httplib.h>

#include <atomic>
#include <functional>
#include <thread>

#include <fmt/format.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "verifact/client.hpp"

using namespace verifact;
using json = nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::string completion(std::string_view content) {
    return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

class LocalEndpoint : public ::testing::Test {
protected:
    void SetUp() override {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const int n = ++requests_;
            last_body_ = req.body;
            last_auth_ = req.get_header_value("Authorization");
            handler_(n, req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    void TearDown() override {
        server_.stop();
        thread_.join();
    }

    HttpChatBackend backend(std::string key = "sk-local") {
        return HttpChatBackend({fmt::format("http://127.0.0.1:{}/v1/chat/completions", port_), std::move(key)});
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> requests_{0};
    std::string last_body_;
    std::string last_auth_;
    std::function<void(int, const httplib::Request&, httplib::Response&)> handler_;
};

}  // namespace

TEST_F(LocalEndpoint, SendsOneUserMessageAndReturnsContent) {
    handler_ = [](int, const httplib::Request&, httplib::Response& res) {
        res.set_content(completion("The helpline is 121."), "application/json");
    };
    auto http = backend();
    CompletionParams params;
    params.model_id = "test-model";
    const auto prompt = render_answer_prompt("banglalink helpline number");
    EXPECT_EQ(http.send(prompt, params), "The helpline is 121.");

    const auto body = json::parse(last_body_);
    EXPECT_EQ(body.at("model"), "test-model");
    EXPECT_EQ(body.at("temperature"), 0.0);
    ASSERT_EQ(body.at("messages").size(), 1u);
    EXPECT_EQ(body["messages"][0].at("role"), "user");
    EXPECT_EQ(body["messages"][0].at("content"), prompt.text);
    EXPECT_EQ(last_auth_, "Bearer sk-local");
}

TEST_F(LocalEndpoint, StatusCodesMapToErrorKinds) {
    std::atomic<int> status{401};
    handler_ = [&](int, const httplib::Request&, httplib::Response& res) {
        res.status = status;
        res.set_content("{}", "application/json");
    };
    auto http = backend();
    const auto prompt = render_answer_prompt("q");
    EXPECT_THROW(http.send(prompt, {}), AuthError);
    status = 403;
    EXPECT_THROW(http.send(prompt, {}), AuthError);
    for (int transient : {408, 429, 500, 503}) {
        status = transient;
        EXPECT_THROW(http.send(prompt, {}), TransientError) << transient;
    }
    status = 400;
    try {
        http.send(prompt, {});
        FAIL();
    } catch (const TransientError&) {
        FAIL() << "400 must not be retryable";
    } catch (const LlmError&) {
    }
}

TEST_F(LocalEndpoint, MalformedBody) {
    handler_ = [](int, const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"choices": []})", "application/json");
    };
    EXPECT_THROW(backend().send(render_answer_prompt("q"), {}), MalformedResponse);
    handler_ = [](int, const httplib::Request&, httplib::Response& res) { res.set_content("<html>", "text/html"); };
    EXPECT_THROW(backend().send(render_answer_prompt("q"), {}), MalformedResponse);
}

TEST_F(LocalEndpoint, ClientRetriesRateLimitThenSucceeds) {
    handler_ = [](int n, const httplib::Request&, httplib::Response& res) {
        if (n <= 2) {
            res.status = 429;
            return;
        }
        res.set_content(completion("Yes"), "application/json");
    };
    CompletionParams params;
    params.backoff_initial = 1ms;
    LlmClient client(std::make_shared<HttpChatBackend>(backend()), params);
    EXPECT_EQ(client.complete(render_classify_prompt("q", "a", "b")), "Yes");
    EXPECT_EQ(requests_, 3);
}

TEST_F(LocalEndpoint, SlowServerTimesOut) {
    handler_ = [](int, const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(600ms);
        res.set_content(completion("late"), "application/json");
    };
    CompletionParams params;
    params.timeout = 150ms;
    EXPECT_THROW(backend().send(render_answer_prompt("q"), params), TimeoutError);
}

TEST(HttpChatBackend, RejectsBadEndpoints) {
    EXPECT_THROW(HttpChatBackend({"api.example.com/v1", "k"}), PreconditionError);
    EXPECT_THROW(HttpChatBackend({"ftp://api.example.com/v1", "k"}), PreconditionError);
    EXPECT_NO_THROW(HttpChatBackend({std::string(kDefaultEndpoint), "k"}));
}

TEST(HttpChatBackend, UnreachableHostIsTransient) {
    // Port 1 on loopback is essentially never listening.
    HttpChatBackend http({"http://127.0.0.1:1/v1/chat/completions", "k"});
    CompletionParams params;
    params.timeout = 500ms;
    EXPECT_THROW(http.send(render_answer_prompt("q"), params), TransientError);
}
