// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "verifact/pipeline.hpp"
#include "verifact/text.hpp"

namespace verifact {

using json = nlohmann::json;

namespace {

void append_line(const std::filesystem::path& path, const std::string& line) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) {
        throw Error(fmt::format("cannot append to '{}'", path.string()));
    }
    out << line << '\n';
    out.flush();
    if (!out) {
        throw Error(fmt::format("failed writing '{}'", path.string()));
    }
}

// Append-only log of finished records, one JSON object per line:
//   {"key": <config fingerprint>, "record": <record line>}
// A torn final line (crash mid-write) is ignored on reload.
class Journal {
public:
    Journal(std::filesystem::path path, std::string key, bool resume) : path_(std::move(path)), key_(std::move(key)) {
        if (path_.empty()) {
            return;
        }
        if (!resume) {
            std::ofstream truncate(path_, std::ios::binary | std::ios::trunc);
            if (!truncate) {
                throw Error(fmt::format("cannot create journal '{}'", path_.string()));
            }
            return;
        }
        std::ifstream in(path_, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) {
                continue;
            }
            try {
                const auto obj = json::parse(line);
                if (obj.at("key").get<std::string>() != key_) {
                    continue;
                }
                auto record = record_from_json_line(obj.at("record").dump(), path_.string());
                if (record.label == Outcome::Error) {
                    continue;
                }
                auto qid = record.qid;
                completed_.insert_or_assign(std::move(qid), std::move(record));
            } catch (const std::exception&) {
                continue;
            }
        }
    }

    const VerificationRecord* find(const std::string& qid) const {
        const auto it = completed_.find(qid);
        return it == completed_.end() ? nullptr : &it->second;
    }

    void commit(const VerificationRecord& record) {
        if (path_.empty()) {
            return;
        }
        const auto line = fmt::format(R"({{"key":{},"record":{}}})", json(key_).dump(), to_json_line(record));
        std::lock_guard lock(mutex_);
        append_line(path_, line);
    }

private:
    std::filesystem::path path_;
    std::string key_;
    std::unordered_map<std::string, VerificationRecord> completed_;
    std::mutex mutex_;
};

}  // namespace

AnswerCache::AnswerCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        try {
            const auto obj = json::parse(line);
            GeneratedAnswer g{obj.at("qid").get<std::string>(), obj.at("answer").get<std::string>(),
                              obj.at("model").get<std::string>(), obj.at("temperature").get<double>()};
            auto qid = g.qid;
            answers_.insert_or_assign({std::move(qid), obj.at("key").get<std::string>()}, std::move(g));
        } catch (const std::exception&) {
            continue;
        }
    }
}

std::optional<GeneratedAnswer> AnswerCache::find(std::string_view qid, std::string_view key) const {
    std::lock_guard lock(mutex_);
    const auto it = answers_.find({std::string(qid), std::string(key)});
    if (it == answers_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void AnswerCache::store(const GeneratedAnswer& answer, std::string_view key) {
    std::lock_guard lock(mutex_);
    answers_.insert_or_assign({answer.qid, std::string(key)}, answer);
    if (!path_.empty()) {
        const json obj = {{"key", key},
                          {"qid", answer.qid},
                          {"answer", answer.text},
                          {"model", answer.model_id},
                          {"temperature", answer.temperature}};
        append_line(path_, obj.dump(-1, ' ', false, json::error_handler_t::replace));
    }
}

size_t AnswerCache::size() const {
    std::lock_guard lock(mutex_);
    return answers_.size();
}

BatchResult verify_batch(std::span<const Question> questions, const VerifyConfig& config,
                         const BatchOptions& options) {
    Journal journal(options.journal, config.fingerprint(), options.resume);

    const size_t n = questions.size();
    std::vector<std::optional<VerificationRecord>> slots(n);
    std::vector<size_t> pending;
    BatchResult result;
    for (size_t i = 0; i < n; ++i) {
        if (const auto* done = journal.find(questions[i].qid);
            done != nullptr && done->question == questions[i].text) {
            slots[i] = *done;
            ++result.resumed;
        } else {
            pending.push_back(i);
        }
    }

    std::atomic<size_t> next{0};
    std::atomic<size_t> computed{0};
    std::mutex error_mutex;
    std::exception_ptr sink_error;

    auto worker = [&] {
        while (!options.stop.stop_requested()) {
            const size_t k = next.fetch_add(1);
            if (k >= pending.size()) {
                return;
            }
            const size_t i = pending[k];
            auto record = verify_one(questions[i], config);
            try {
                journal.commit(record);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!sink_error) {
                    sink_error = std::current_exception();
                }
                return;
            }
            if (options.on_record) {
                options.on_record(record);
            }
            slots[i] = std::move(record);
            computed.fetch_add(1);
        }
    };

    const auto workers = std::min<size_t>(static_cast<size_t>(std::max(options.workers, 1)), pending.size());
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (size_t t = 0; t < workers; ++t) {
            threads.emplace_back(worker);
        }
    }
    if (sink_error) {
        std::rethrow_exception(sink_error);
    }

    result.computed = computed.load();
    result.complete = true;
    result.records.reserve(n);
    for (auto& slot : slots) {
        if (slot) {
            result.records.push_back(std::move(*slot));
        } else {
            result.complete = false;
        }
    }
    return result;
}

}  // namespace verifact
