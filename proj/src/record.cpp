// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "verifact/pipeline.hpp"
#include "verifact/text.hpp"

namespace verifact {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, kOutcomeCount> kOutcomeNames{"Yes",         "No",         "Not Related",
                                                                    "Unparseable", "NoEvidence", "Error"};

ojson opt_string(const std::optional<std::string>& s) {
    return s ? ojson(*s) : ojson(nullptr);
}

std::string get_string(const json& obj, const char* key, std::string_view where) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return {};
    }
    if (!it->is_string()) {
        throw InputError(fmt::format("{}: field '{}' must be a string", where, key));
    }
    return it->get<std::string>();
}

std::optional<std::string> get_opt_string(const json& obj, const char* key, std::string_view where) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    return get_string(obj, key, where);
}

}  // namespace

std::string_view to_string(Outcome outcome) noexcept {
    return kOutcomeNames[static_cast<size_t>(outcome)];
}

std::optional<Outcome> outcome_from_string(std::string_view text) noexcept {
    for (size_t i = 0; i < kOutcomeNames.size(); ++i) {
        if (kOutcomeNames[i] == text) {
            return static_cast<Outcome>(i);
        }
    }
    return std::nullopt;
}

Outcome to_outcome(VerificationLabel label) noexcept {
    switch (label) {
        case VerificationLabel::Yes: return Outcome::Yes;
        case VerificationLabel::No: return Outcome::No;
        case VerificationLabel::NotRelated: return Outcome::NotRelated;
    }
    return Outcome::Error;
}

std::optional<VerificationLabel> as_label(Outcome outcome) noexcept {
    switch (outcome) {
        case Outcome::Yes: return VerificationLabel::Yes;
        case Outcome::No: return VerificationLabel::No;
        case Outcome::NotRelated: return VerificationLabel::NotRelated;
        default: return std::nullopt;
    }
}

std::string to_json_line(const VerificationRecord& r) {
    ojson obj;
    obj["qid"] = r.qid;
    obj["question"] = r.question;
    obj["answer"] = r.answer ? ojson(r.answer->text) : ojson(nullptr);
    obj["model"] = r.answer ? ojson(r.answer->model_id) : ojson(nullptr);
    obj["temperature"] = r.answer ? ojson(r.answer->temperature) : ojson(nullptr);
    obj["retriever_id"] = r.retriever_id;
    obj["pid"] = r.evidence ? ojson(r.evidence->pid) : ojson(nullptr);
    obj["passage"] = r.evidence ? ojson(r.evidence->passage_text) : ojson(nullptr);
    obj["score"] = (r.evidence && r.evidence->score) ? ojson(*r.evidence->score) : ojson(nullptr);
    obj["reader_answer"] = r.evidence ? opt_string(r.evidence->reader_answer) : ojson(nullptr);
    obj["compared"] = r.compared;
    obj["label"] = to_string(r.label);
    obj["raw"] = r.raw;
    obj["diagnostic"] = r.diagnostic.empty() ? ojson(nullptr) : ojson(r.diagnostic);
    obj["stage"] = r.error_stage.empty() ? ojson(nullptr) : ojson(r.error_stage);
    obj["error"] = r.error.empty() ? ojson(nullptr) : ojson(r.error);
    return obj.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

VerificationRecord record_from_json_line(std::string_view line, std::string_view where) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        throw InputError(fmt::format("{}: {}", where, e.what()));
    }
    if (!obj.is_object()) {
        throw InputError(fmt::format("{}: record must be a JSON object", where));
    }
    VerificationRecord r;
    r.qid = get_string(obj, "qid", where);
    if (r.qid.empty()) {
        throw InputError(fmt::format("{}: record has no qid", where));
    }
    r.question = get_string(obj, "question", where);
    const auto label_text = get_string(obj, "label", where);
    const auto label = outcome_from_string(label_text);
    if (!label) {
        throw InputError(fmt::format("{}: unknown label '{}'", where, label_text));
    }
    r.label = *label;

    if (auto answer = get_opt_string(obj, "answer", where)) {
        GeneratedAnswer g{r.qid, std::move(*answer), get_string(obj, "model", where), 0.0};
        if (const auto it = obj.find("temperature"); it != obj.end() && it->is_number()) {
            g.temperature = it->get<double>();
        }
        r.answer = std::move(g);
    }
    r.retriever_id = get_string(obj, "retriever_id", where);
    if (auto pid = get_opt_string(obj, "pid", where)) {
        Evidence e;
        e.pid = std::move(*pid);
        e.passage_text = get_string(obj, "passage", where);
        if (const auto it = obj.find("score"); it != obj.end() && it->is_number()) {
            e.score = it->get<double>();
        }
        e.retriever_id = r.retriever_id;
        e.reader_answer = get_opt_string(obj, "reader_answer", where);
        r.evidence = std::move(e);
    }
    r.compared = get_string(obj, "compared", where);
    r.raw = get_string(obj, "raw", where);
    r.diagnostic = get_string(obj, "diagnostic", where);
    r.error_stage = get_string(obj, "stage", where);
    r.error = get_string(obj, "error", where);
    return r;
}

std::vector<VerificationRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(fmt::format("cannot open record file '{}'", path.string()));
    }
    std::vector<VerificationRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        records.push_back(record_from_json_line(line, fmt::format("{}:{}", path.string(), line_no)));
    }
    return records;
}

void write_records(const std::filesystem::path& path, std::span<const VerificationRecord> records) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(fmt::format("cannot open '{}' for writing", tmp.string()));
        }
        for (const auto& r : records) {
            out << to_json_line(r) << '\n';
        }
        out.flush();
        if (!out) {
            throw Error(fmt::format("failed writing '{}'", tmp.string()));
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace verifact
