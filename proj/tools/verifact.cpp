// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0
//
// verifact: answer, retrieve evidence, self-verify, and analyze the labels.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "verifact/analysis.hpp"
#include "verifact/client.hpp"
#include "verifact/corpus.hpp"
#include "verifact/index.hpp"
#include "verifact/pipeline.hpp"
#include "verifact/runs.hpp"

namespace fs = std::filesystem;
using namespace verifact;

namespace {

constexpr uint64_t kDefaultSeed = 42;

struct IndexArgs {
    std::string collection;
    std::string out;
    double k1 = Bm25Params{}.k1;
    double b = Bm25Params{}.b;
};

struct RetrieveArgs {
    std::string collection;
    std::string index;
    std::string query;
    std::string queries;
    std::string run_out;
    std::string tag = "bm25";
    size_t k = 10;
    double k1 = Bm25Params{}.k1;
    double b = Bm25Params{}.b;
};

struct VerifyArgs {
    std::string collection;
    std::string queries;
    std::string retriever = "bm25";
    std::string index;
    bool reader = false;
    std::string model{kDefaultModel};
    double temperature = 0.0;
    std::string mock;
    std::string endpoint{kDefaultEndpoint};
    std::string out;
    std::string journal;
    std::string answers;
    std::string prompts;
    std::string query_order = "question-first";
    bool resume = false;
    double k1 = Bm25Params{}.k1;
    double b = Bm25Params{}.b;
    int max_in_flight = 4;
    int retries = 3;
    int timeout_s = 60;
};

struct AnalyzeArgs {
    std::vector<std::string> files;
    std::vector<std::string> names;
    std::string csv;
};

struct SampleArgs {
    std::string records;
    std::string label = "Yes";
    size_t n = 100;
    uint64_t seed = kDefaultSeed;
    std::string out;
};

InvertedIndex load_or_build(const Corpus& corpus, const std::string& snapshot, Bm25Params params) {
    if (snapshot.empty()) {
        return InvertedIndex::build(corpus, params);
    }
    auto index = InvertedIndex::load(fs::path(snapshot));
    if (index.doc_count() != corpus.size()) {
        throw InputError(fmt::format("index '{}' covers {} passages but the collection has {}", snapshot,
                                     index.doc_count(), corpus.size()));
    }
    return index;
}

int run_index(const IndexArgs& a) {
    const auto corpus = load_collection(a.collection);
    const auto index = InvertedIndex::build(corpus, {a.k1, a.b});
    index.save(fs::path(a.out));
    fmt::print("indexed {} passages, avg_doc_len {:.4f}, {} terms -> {}\n", index.doc_count(), index.avg_doc_len(),
               index.vocabulary_size(), a.out);
    return 0;
}

int run_retrieve(const RetrieveArgs& a) {
    if (a.query.empty() == a.queries.empty()) {
        throw PreconditionError("retrieve needs exactly one of --query or --queries");
    }
    std::optional<Corpus> corpus;
    std::optional<InvertedIndex> index;
    if (!a.collection.empty()) {
        corpus = load_collection(a.collection);
        index = load_or_build(*corpus, a.index, {a.k1, a.b});
    } else if (!a.index.empty()) {
        index = InvertedIndex::load(fs::path(a.index));
    } else {
        throw PreconditionError("retrieve needs --collection or --index");
    }

    if (!a.query.empty()) {
        for (const auto& hit : index->search(a.query, a.k)) {
            fmt::print("{}\t{}\t{}", hit.rank, hit.pid, format_run_score(hit.score));
            if (corpus) {
                fmt::print("\t{}", corpus->find(hit.pid)->text);
            }
            fmt::print("\n");
        }
        return 0;
    }

    RunResults results;
    for (const auto& q : load_queries(a.queries)) {
        results[q.qid] = index->search(q.text, a.k);
    }
    if (a.run_out.empty()) {
        serialize_run(std::cout, results, a.tag);
    } else {
        serialize_run(fs::path(a.run_out), results, a.tag);
        fmt::print(stderr, "wrote run for {} queries to {}\n", results.size(), a.run_out);
    }
    return 0;
}

int run_verify(const VerifyArgs& a) {
    CompletionParams params;
    params.model_id = a.model;
    params.temperature = a.temperature;
    params.max_in_flight = a.max_in_flight;
    params.retry_limit = a.retries;
    params.timeout = std::chrono::seconds(a.timeout_s);
    params.validate();

    std::shared_ptr<ChatBackend> backend;
    if (!a.mock.empty()) {
        backend = MockBackend::from_transcript(a.mock);
    } else {
        backend = std::make_shared<HttpChatBackend>(HttpBackendConfig{a.endpoint, api_key_from_env()});
    }
    LlmClient client(backend, params);

    const auto corpus = load_collection(a.collection);
    const auto questions = load_queries(a.queries);

    std::optional<InvertedIndex> index;
    std::unique_ptr<Retriever> retriever;
    if (a.retriever == "bm25") {
        index = load_or_build(corpus, a.index, {a.k1, a.b});
        retriever = std::make_unique<Bm25Retriever>(corpus, *index);
    } else if (a.retriever.rfind("run:", 0) == 0 && a.retriever.size() > 4) {
        retriever = std::make_unique<RunRetriever>(parse_run_file(a.retriever.substr(4)), corpus);
    } else {
        throw PreconditionError(fmt::format("--retriever must be 'bm25' or 'run:<path>', got '{}'", a.retriever));
    }

    std::optional<AnswerCache> answers;
    if (!a.answers.empty()) {
        answers.emplace(fs::path(a.answers));
    }

    VerifyConfig config;
    config.retriever = retriever.get();
    config.reader_enabled = a.reader;
    config.client = &client;
    config.templates = a.prompts.empty() ? PromptTemplates::builtin() : PromptTemplates::load_dir(a.prompts);
    config.answers = answers ? &*answers : nullptr;
    if (a.query_order == "question-first") {
        config.query_order = QueryOrder::QuestionFirst;
    } else if (a.query_order == "answer-first") {
        config.query_order = QueryOrder::AnswerFirst;
    } else {
        throw PreconditionError(fmt::format("--query-order must be question-first or answer-first"));
    }

    BatchOptions options;
    options.workers = a.max_in_flight;
    options.journal = a.journal.empty() ? fs::path(a.out + ".journal") : fs::path(a.journal);
    options.resume = a.resume;

    const auto result = verify_batch(questions, config, options);
    write_records(a.out, result.records);

    const auto errors = std::count_if(result.records.begin(), result.records.end(),
                                      [](const VerificationRecord& r) { return r.label == Outcome::Error; });
    std::string counts;
    if (!result.records.empty()) {
        const auto dist = label_distribution(result.records);
        for (size_t i = 0; i < kOutcomeCount; ++i) {
            const auto o = static_cast<Outcome>(i);
            if (dist.count(o) > 0) {
                counts += fmt::format(", {} {}", to_string(o), dist.count(o));
            }
        }
    }
    fmt::print("verified {} questions ({} resumed, {} computed){}; {} per-question errors -> {}\n",
               result.records.size(), result.resumed, result.computed, counts, errors, a.out);
    return 0;
}

int run_analyze(const AnalyzeArgs& a) {
    if (!a.names.empty() && a.names.size() != a.files.size()) {
        throw PreconditionError("--names must give one name per record file");
    }
    std::vector<std::vector<VerificationRecord>> sets;
    std::vector<LabelDistribution> dists;
    for (size_t i = 0; i < a.files.size(); ++i) {
        sets.push_back(read_records(a.files[i]));
        const auto name = a.names.empty() ? fs::path(a.files[i]).stem().string() : a.names[i];
        dists.push_back(label_distribution(sets.back(), name));
    }
    std::vector<AgreementMatrix> matrices;
    for (size_t i = 0; i < sets.size(); ++i) {
        for (size_t j = i + 1; j < sets.size(); ++j) {
            matrices.push_back(agreement_matrix(sets[i], sets[j], dists[i].config, dists[j].config));
        }
    }
    fmt::print("{}", render_report(dists, matrices));
    if (!a.csv.empty()) {
        std::ofstream out(a.csv, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(fmt::format("cannot open '{}' for writing", a.csv));
        }
        out << render_report_csv(dists, matrices);
    }
    return 0;
}

int run_sample(const SampleArgs& a) {
    const auto label = outcome_from_string(a.label);
    if (!label) {
        throw PreconditionError(fmt::format("unknown label '{}'", a.label));
    }
    const auto records = read_records(a.records);
    const auto sample = sample_for_audit(records, *label, a.n, a.seed);
    const auto text = render_audit(sample);
    if (a.out.empty()) {
        fmt::print("{}", text);
    } else {
        std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
        out << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verifact: retrieve supporting evidence for LLM answers and let the LLM verify them"};
    app.set_config("--config", "", "TOML/INI config file; flags override it");
    app.require_subcommand(1);

    IndexArgs index_args;
    auto* index_cmd = app.add_subcommand("index", "Build and save a BM25 index snapshot");
    index_cmd->add_option("--collection", index_args.collection, "Passage TSV (pid<TAB>text)")->required();
    index_cmd->add_option("--out", index_args.out, "Snapshot path")->required();
    index_cmd->add_option("--k1", index_args.k1, "BM25 k1")->capture_default_str();
    index_cmd->add_option("--b", index_args.b, "BM25 b")->capture_default_str();

    RetrieveArgs retrieve_args;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "Ad-hoc BM25 query, or a TREC run over a query file");
    retrieve_cmd->add_option("--collection", retrieve_args.collection, "Passage TSV");
    retrieve_cmd->add_option("--index", retrieve_args.index, "Index snapshot from `verifact index`");
    retrieve_cmd->add_option("--query", retrieve_args.query, "Query text");
    retrieve_cmd->add_option("--queries", retrieve_args.queries, "Query TSV (qid<TAB>text); emits a TREC run");
    retrieve_cmd->add_option("--run", retrieve_args.run_out, "Write the TREC run here instead of stdout");
    retrieve_cmd->add_option("--tag", retrieve_args.tag, "Run tag")->capture_default_str();
    retrieve_cmd->add_option("--k", retrieve_args.k, "Results per query")->capture_default_str()->check(
        CLI::PositiveNumber);
    retrieve_cmd->add_option("--k1", retrieve_args.k1, "BM25 k1")->capture_default_str();
    retrieve_cmd->add_option("--b", retrieve_args.b, "BM25 b")->capture_default_str();

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "Answer, retrieve, (read,) and classify every question");
    verify_cmd->add_option("--collection", verify_args.collection, "Passage TSV")->required();
    verify_cmd->add_option("--queries", verify_args.queries, "Query TSV")->required();
    verify_cmd->add_option("--retriever", verify_args.retriever, "bm25 | run:<trec run file>")->capture_default_str();
    verify_cmd->add_option("--index", verify_args.index, "Prebuilt index snapshot for bm25");
    verify_cmd->add_flag("--reader", verify_args.reader, "Extract a concise answer from the passage first");
    verify_cmd->add_option("--model", verify_args.model, "Chat model id")->capture_default_str();
    verify_cmd->add_option("--temperature", verify_args.temperature, "Sampling temperature")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    verify_cmd->add_option("--mock", verify_args.mock, "Mock transcript (JSON lines) instead of a live endpoint");
    verify_cmd->add_option("--endpoint", verify_args.endpoint, "Chat-completions URL")->capture_default_str();
    verify_cmd->add_option("--out", verify_args.out, "Record file (JSON lines)")->required();
    verify_cmd->add_option("--journal", verify_args.journal, "Resume journal (default: <out>.journal)");
    verify_cmd->add_option("--answers", verify_args.answers, "Generated-answer cache shared across retrievers");
    verify_cmd->add_option("--prompts", verify_args.prompts, "Directory with answer/reader/classify.txt overrides");
    verify_cmd->add_option("--query-order", verify_args.query_order, "question-first | answer-first")
        ->capture_default_str();
    verify_cmd->add_flag("--resume", verify_args.resume, "Reuse journaled records from an interrupted run");
    verify_cmd->add_option("--k1", verify_args.k1, "BM25 k1")->capture_default_str();
    verify_cmd->add_option("--b", verify_args.b, "BM25 b")->capture_default_str();
    verify_cmd->add_option("--max-in-flight", verify_args.max_in_flight, "Concurrent LLM calls")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    verify_cmd->add_option("--retries", verify_args.retries, "Retries per call on transient failure")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    verify_cmd->add_option("--timeout", verify_args.timeout_s, "Per-call timeout in seconds")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "Label distributions and pairwise agreement matrices");
    analyze_cmd->add_option("files", analyze_args.files, "Record files")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--names", analyze_args.names, "Display name per file (default: file stem)")
        ->delimiter(',');
    analyze_cmd->add_option("--csv", analyze_args.csv, "Also write the numbers as CSV");

    SampleArgs sample_args;
    auto* sample_cmd = app.add_subcommand("sample", "Random records of one label for manual audit");
    sample_cmd->add_option("records", sample_args.records, "Record file")->required()->check(CLI::ExistingFile);
    sample_cmd->add_option("--label", sample_args.label, "Yes | No | Not Related | Unparseable | NoEvidence | Error")
        ->capture_default_str();
    sample_cmd->add_option("--n", sample_args.n, "Sample size")->capture_default_str();
    sample_cmd->add_option("--seed", sample_args.seed, "Random seed")->capture_default_str();
    sample_cmd->add_option("--out", sample_args.out, "Write here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*index_cmd) return run_index(index_args);
        if (*retrieve_cmd) return run_retrieve(retrieve_args);
        if (*verify_cmd) return run_verify(verify_args);
        if (*analyze_cmd) return run_analyze(analyze_args);
        if (*sample_cmd) return run_sample(sample_args);
    } catch (const std::exception& e) {
        fmt::print(stderr, "verifact: error: {}\n", e.what());
        return 1;
    }
    return 0;
}
