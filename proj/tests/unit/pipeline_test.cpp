// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "scripted_mock.hpp"
#include "test_support.hpp"
#include "verifact/pipeline.hpp"
#include "verifact/runs.hpp"

using namespace verifact;
using namespace verifact::testing;

namespace {

CompletionParams quick() {
    CompletionParams p;
    p.backoff_initial = std::chrono::milliseconds(1);
    p.backoff_max = std::chrono::milliseconds(2);
    return p;
}

// The three passages of the worked examples plus some distractors.
Corpus small_corpus() {
    return Corpus({
        {"p1", std::string(kBanglalinkReader)},
        {"p2", "Nyquil takes approximately 20-40 minutes to kick in, depending on weight and metabolism."},
        {"p3", std::string(kCmaPassage)},
        {"p4", "Zurich is the largest city in Switzerland."},
        {"p5", "Infusion pumps deliver fluids into a patient's body."},
    });
}

struct Fixture {
    Corpus corpus = small_corpus();
    InvertedIndex index = InvertedIndex::build(corpus);
    Bm25Retriever retriever{corpus, index};
    std::shared_ptr<MockBackend> mock = std::make_shared<MockBackend>();
    LlmClient client{mock, quick()};

    VerifyConfig config(bool reader = false) {
        VerifyConfig c;
        c.retriever = &retriever;
        c.client = &client;
        c.reader_enabled = reader;
        return c;
    }
};

std::vector<Question> load_10() {
    return load_queries(fixture_path("queries_10.tsv"));
}

std::string jsonl(const std::vector<VerificationRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json_line(r) + "\n";
    }
    return out;
}

}  // namespace

TEST(CombineQuery, QuestionThenAnswerWithOneSpace) {
    const auto q = combine_query("7", "banglalink helpline number", kBanglalinkAnswer);
    EXPECT_EQ(q.qid, "7");
    EXPECT_EQ(q.text, "banglalink helpline number " + std::string(kBanglalinkAnswer));
    EXPECT_EQ(combine_query("1", "a", "b").text, "a b");
    EXPECT_EQ(combine_query("1", "a ", " b").text, "a   b");
    EXPECT_THROW(combine_query("1", "", "b"), PreconditionError);
    EXPECT_THROW(combine_query("1", "a", ""), PreconditionError);
}

TEST(GenerateAnswer, StoresCompletionVerbatim) {
    Fixture f;
    const std::string refusal = "I'm sorry, I don't have access to real-time information.\n";
    f.mock->script(render_answer_prompt("what is the weather").text, refusal);
    const auto a = generate_answer(f.client, {"q9", "what is the weather"});
    EXPECT_EQ(a.qid, "q9");
    EXPECT_EQ(a.text, refusal);
    EXPECT_EQ(a.model_id, "gpt-3.5-turbo");
    EXPECT_EQ(a.temperature, 0.0);
}

TEST(Classify, WorkedExampleSupported) {
    Fixture f;
    f.mock->script(render_classify_prompt(kNyquilQuestion, kNyquilAnswer, kNyquilReader).text, "Yes");
    const auto c = classify(f.client, kNyquilQuestion, kNyquilAnswer, kNyquilReader);
    EXPECT_EQ(c.label, Outcome::Yes);
    EXPECT_EQ(c.raw, "Yes");
}

TEST(Classify, WorkedExampleContradicted) {
    Fixture f;
    f.mock->script(render_classify_prompt(kBanglalinkQuestion, kBanglalinkAnswer, kBanglalinkReader).text, "No");
    EXPECT_EQ(classify(f.client, kBanglalinkQuestion, kBanglalinkAnswer, kBanglalinkReader).label, Outcome::No);
}

TEST(Classify, ReasksOnceThenGivesUp) {
    Fixture f;
    const auto prompt = render_classify_prompt("q", "a", "b").text;
    f.mock->script(prompt, "maybe");
    const auto c = classify(f.client, "q", "a", "b");
    EXPECT_EQ(c.label, Outcome::Unparseable);
    EXPECT_EQ(c.raw, "maybe");
    EXPECT_EQ(f.mock->calls(), 2u);
}

TEST(Classify, ReaskRecovers) {
    Fixture f;
    f.mock->script_sequence(render_classify_prompt("q", "a", "b").text, {"Well, hard to say.", "Not Related"});
    const auto c = classify(f.client, "q", "a", "b");
    EXPECT_EQ(c.label, Outcome::NotRelated);
    EXPECT_EQ(c.raw, "Not Related");
    EXPECT_EQ(f.mock->calls(), 2u);
}

TEST(VerifyOne, FullTraceWithoutReader) {
    Fixture f;
    const Question q{"s1", std::string(kBanglalinkQuestion)};
    f.mock->script(render_answer_prompt(q.text).text, std::string(kBanglalinkAnswer));
    f.mock->script(render_classify_prompt(q.text, kBanglalinkAnswer, kBanglalinkReader).text, "No");
    const auto r = verify_one(q, f.config());
    EXPECT_EQ(r.label, Outcome::No);
    ASSERT_TRUE(r.answer.has_value());
    EXPECT_EQ(r.answer->text, kBanglalinkAnswer);
    ASSERT_TRUE(r.evidence.has_value());
    EXPECT_EQ(r.evidence->pid, "p1");
    EXPECT_FALSE(r.evidence->reader_answer.has_value());
    EXPECT_EQ(r.compared, r.evidence->passage_text);
    EXPECT_EQ(r.retriever_id, "bm25");
    EXPECT_EQ(r.raw, "No");
    EXPECT_TRUE(r.error_stage.empty());
    EXPECT_EQ(f.mock->calls_for(TemplateId::Reader), 0u);
}

TEST(VerifyOne, ReaderOutputIsComparedVerbatimEvenWhenWrong) {
    Fixture f;
    const Question q{"s3", std::string(kCmaQuestion)};
    const std::string answer = "The average pay of a CMA in Idaho is about $80,000 per year.";
    f.mock->script(render_answer_prompt(q.text).text, answer);
    f.mock->script(render_reader_prompt(q.text, kCmaPassage).text, std::string(kCmaReader));
    f.mock->script(render_classify_prompt(q.text, answer, kCmaReader).text, "No");
    const auto r = verify_one(q, f.config(true));
    ASSERT_TRUE(r.evidence.has_value());
    EXPECT_EQ(r.evidence->pid, "p3");
    ASSERT_TRUE(r.evidence->reader_answer.has_value());
    EXPECT_NE(r.evidence->reader_answer->find("$119,869"), std::string::npos);
    EXPECT_EQ(r.compared, kCmaReader);
    EXPECT_EQ(r.label, Outcome::No);
}

TEST(VerifyOne, NoEvidenceSkipsClassifier) {
    Fixture f;
    const Question q{"x", "zzzz"};
    f.mock->script(render_answer_prompt(q.text).text, "qqqq");
    const auto r = verify_one(q, f.config());
    EXPECT_EQ(r.label, Outcome::NoEvidence);
    EXPECT_FALSE(r.diagnostic.empty());
    EXPECT_FALSE(r.evidence.has_value());
    EXPECT_EQ(f.mock->calls_for(TemplateId::Classify), 0u);
}

TEST(VerifyOne, RunRetrieverMismatchIsNoEvidence) {
    Fixture f;
    std::istringstream run("s1 Q0 missing 1 3.0 dense\n");
    const RunRetriever retriever(parse_run(run), f.corpus);
    auto config = f.config();
    config.retriever = &retriever;
    f.mock->script_default(TemplateId::Answer, "111");
    const auto r = verify_one({"s1", "banglalink"}, config);
    EXPECT_EQ(r.label, Outcome::NoEvidence);
    EXPECT_NE(r.diagnostic.find("corpus/run mismatch"), std::string::npos);
    EXPECT_EQ(r.retriever_id, "dense");
}

TEST(VerifyOne, StageFailuresBecomeErrorRecords) {
    const Question q{"s1", std::string(kBanglalinkQuestion)};
    {
        Fixture f;  // nothing scripted
        const auto r = verify_one(q, f.config());
        EXPECT_EQ(r.label, Outcome::Error);
        EXPECT_EQ(r.error_stage, "answer");
        EXPECT_NE(r.error.find("unscripted"), std::string::npos);
    }
    {
        Fixture f;
        f.mock->script_default(TemplateId::Answer, "   \n");
        EXPECT_EQ(verify_one(q, f.config()).error_stage, "answer");
    }
    {
        Fixture f;
        f.mock->script_default(TemplateId::Answer, std::string(kBanglalinkAnswer));
        const auto r = verify_one(q, f.config(true));
        EXPECT_EQ(r.label, Outcome::Error);
        EXPECT_EQ(r.error_stage, "reader");
        EXPECT_TRUE(r.answer.has_value());
        EXPECT_TRUE(r.evidence.has_value());
    }
    {
        Fixture f;
        f.mock->script_default(TemplateId::Answer, std::string(kBanglalinkAnswer));
        f.mock->fail_next(render_classify_prompt(q.text, kBanglalinkAnswer, kBanglalinkReader).text, 10);
        const auto r = verify_one(q, f.config());
        EXPECT_EQ(r.error_stage, "classify");
        EXPECT_NE(r.error.find("attempts"), std::string::npos);
    }
    {
        VerifyConfig empty;
        EXPECT_EQ(verify_one(q, empty).error_stage, "config");
    }
}

TEST(VerifyOne, AnswerFirstQueryOrder) {
    Fixture f;
    f.mock->script_default(TemplateId::Answer, "Infusion pumps");
    f.mock->script_default(TemplateId::Classify, "Yes");
    auto config = f.config();
    config.query_order = QueryOrder::AnswerFirst;
    const auto r = verify_one({"s4", "what company makes infusion"}, config);
    ASSERT_TRUE(r.evidence.has_value());
    EXPECT_EQ(r.evidence->pid, "p5");
    EXPECT_NE(config.fingerprint(), f.config().fingerprint());
}

TEST(RecordJson, RoundTripPreservesEveryField) {
    VerificationRecord r;
    r.qid = "q1";
    r.question = "what is \"x\"?";
    r.answer = GeneratedAnswer{"q1", "line\nbreak", "m", 0.5};
    r.evidence = Evidence{"p9", "passage\ttext", 12.25, "bm25", std::string("extracted")};
    r.compared = "extracted";
    r.label = Outcome::NotRelated;
    r.raw = "Not Related";
    r.retriever_id = "bm25";
    const auto line = to_json_line(r);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    EXPECT_EQ(record_from_json_line(line), r);

    VerificationRecord bare;
    bare.qid = "q2";
    bare.question = "q";
    bare.label = Outcome::Error;
    bare.error_stage = "answer";
    bare.error = "boom";
    EXPECT_EQ(record_from_json_line(to_json_line(bare)), bare);
    EXPECT_THROW(record_from_json_line("{not json"), InputError);
}

TEST(RecordJson, FieldNamesAndOrder) {
    VerificationRecord r;
    r.qid = "q1";
    r.question = "q";
    r.label = Outcome::Yes;
    const auto line = to_json_line(r);
    size_t last = 0;
    for (const char* field : {"\"qid\"", "\"question\"", "\"answer\"", "\"pid\"", "\"passage\"", "\"reader_answer\"",
                              "\"compared\"", "\"label\"", "\"raw\""}) {
        const auto at = line.find(field);
        ASSERT_NE(at, std::string::npos) << field;
        EXPECT_GT(at, last) << field;
        last = at;
    }
    EXPECT_NE(line.find("\"label\":\"Yes\""), std::string::npos);
}

TEST(RecordJson, InvalidUtf8IsReplaced) {
    VerificationRecord r;
    r.qid = "q1";
    r.question = std::string("caf\xe9");
    const auto line = to_json_line(r);
    EXPECT_NO_THROW(record_from_json_line(line));
}

TEST(Records, WriteAndReadFile) {
    TempDir dir;
    std::vector<VerificationRecord> records(3);
    for (size_t i = 0; i < records.size(); ++i) {
        records[i].qid = "q" + std::to_string(i);
        records[i].question = "question";
        records[i].label = static_cast<Outcome>(i);
    }
    write_records(dir / "out.jsonl", records);
    EXPECT_EQ(read_records(dir / "out.jsonl"), records);
    EXPECT_THROW(read_records(dir / "absent.jsonl"), InputError);
}

TEST(Outcome, StringsRoundTrip) {
    for (size_t i = 0; i < kOutcomeCount; ++i) {
        const auto o = static_cast<Outcome>(i);
        EXPECT_EQ(outcome_from_string(to_string(o)), o);
    }
    EXPECT_EQ(to_string(Outcome::NotRelated), "Not Related");
    EXPECT_FALSE(outcome_from_string("maybe").has_value());
    EXPECT_EQ(as_label(Outcome::No), VerificationLabel::No);
    EXPECT_FALSE(as_label(Outcome::NoEvidence).has_value());
}

class BatchTest : public ::testing::Test {
protected:
    Corpus corpus = load_collection(fixture_path("msmarco_sample_1000.tsv"));
    InvertedIndex index = InvertedIndex::build(corpus);
    Bm25Retriever retriever{corpus, index};
    std::vector<Question> questions = load_10();
    std::map<std::string, std::string> answers = fixture_answers(questions);

    std::shared_ptr<MockBackend> mock() { return scripted_mock(questions, answers, corpus, index); }

    VerifyConfig config(LlmClient& client, bool reader = false) {
        VerifyConfig c;
        c.retriever = &retriever;
        c.client = &client;
        c.reader_enabled = reader;
        return c;
    }
};

TEST_F(BatchTest, RecordsFollowInputOrderAndAreDeterministic) {
    std::string first;
    for (int workers : {1, 4, 8}) {
        auto backend = mock();
        backend->set_latency(std::chrono::milliseconds(2));
        LlmClient client(backend, quick());
        BatchOptions options;
        options.workers = workers;
        const auto result = verify_batch(questions, config(client), options);
        ASSERT_TRUE(result.complete);
        ASSERT_EQ(result.records.size(), questions.size());
        for (size_t i = 0; i < questions.size(); ++i) {
            EXPECT_EQ(result.records[i].qid, questions[i].qid);
            EXPECT_NE(result.records[i].label, Outcome::Error) << result.records[i].error;
        }
        if (first.empty()) {
            first = jsonl(result.records);
        } else {
            EXPECT_EQ(jsonl(result.records), first) << "workers=" << workers;
        }
    }
}

TEST_F(BatchTest, ScriptedLabelsAppear) {
    LlmClient client(mock(), quick());
    const auto records = verify_batch(questions, config(client), {}).records;
    EXPECT_EQ(records[0].label, Outcome::Yes);
    EXPECT_EQ(records[1].label, Outcome::No);
    EXPECT_EQ(records[2].label, Outcome::NotRelated);
    EXPECT_EQ(records[3].label, Outcome::Yes);
    EXPECT_EQ(records[4].label, Outcome::No);
    EXPECT_EQ(records[4].raw, "No");
    EXPECT_EQ(records[0].evidence->pid, "7002");
}

TEST_F(BatchTest, ConcurrencyIsBoundedByClient) {
    auto backend = mock();
    backend->set_latency(std::chrono::milliseconds(5));
    auto params = quick();
    params.max_in_flight = 2;
    LlmClient client(backend, params);
    BatchOptions options;
    options.workers = 8;
    ASSERT_TRUE(verify_batch(questions, config(client), options).complete);
    EXPECT_LE(backend->peak_in_flight(), 2u);
}

TEST_F(BatchTest, StopAndResume) {
    TempDir dir;
    const auto journal = dir / "run.journal";

    auto uninterrupted_backend = mock();
    LlmClient reference_client(uninterrupted_backend, quick());
    const auto reference = jsonl(verify_batch(questions, config(reference_client), {}).records);

    auto backend = mock();
    LlmClient client(backend, quick());
    std::stop_source stop;
    BatchOptions first;
    first.journal = journal;
    first.stop = stop.get_token();
    size_t seen = 0;
    first.on_record = [&](const VerificationRecord&) {
        if (++seen == 5) {
            stop.request_stop();
        }
    };
    const auto partial = verify_batch(questions, config(client), first);
    EXPECT_FALSE(partial.complete);
    EXPECT_EQ(partial.computed, 5u);
    const auto answers_before = backend->calls_for(TemplateId::Answer);
    EXPECT_EQ(answers_before, 5u);

    BatchOptions second;
    second.journal = journal;
    second.resume = true;
    const auto resumed = verify_batch(questions, config(client), second);
    EXPECT_TRUE(resumed.complete);
    EXPECT_EQ(resumed.resumed, 5u);
    EXPECT_EQ(resumed.computed, 5u);
    EXPECT_EQ(backend->calls_for(TemplateId::Answer) - answers_before, 5u);
    EXPECT_EQ(jsonl(resumed.records), reference);
}

TEST_F(BatchTest, TornJournalLineIsRecomputed) {
    TempDir dir;
    const auto journal = dir / "run.journal";
    auto backend = mock();
    LlmClient client(backend, quick());
    BatchOptions options;
    options.journal = journal;
    const auto full = verify_batch(questions, config(client), options);

    auto text = read_file(journal);
    text.resize(text.size() - 20);  // cut into the last record
    write_file(journal, text);

    backend->reset_stats();
    options.resume = true;
    auto fresh = mock();
    LlmClient fresh_client(fresh, quick());
    const auto resumed = verify_batch(questions, config(fresh_client), options);
    EXPECT_EQ(resumed.resumed, 9u);
    EXPECT_EQ(resumed.computed, 1u);
    EXPECT_EQ(jsonl(resumed.records), jsonl(full.records));
}

TEST_F(BatchTest, ConfigChangeInvalidatesJournal) {
    TempDir dir;
    const auto journal = dir / "run.journal";
    auto backend = mock();
    LlmClient client(backend, quick());
    BatchOptions options;
    options.journal = journal;
    verify_batch(questions, config(client), options);

    options.resume = true;
    const auto with_reader = verify_batch(questions, config(client, true), options);
    EXPECT_EQ(with_reader.resumed, 0u);
    EXPECT_EQ(with_reader.computed, 10u);
    for (const auto& r : with_reader.records) {
        ASSERT_TRUE(r.evidence.has_value()) << r.qid;
        ASSERT_TRUE(r.evidence->reader_answer.has_value());
        EXPECT_EQ(r.compared, *r.evidence->reader_answer);
    }
}

TEST_F(BatchTest, ErrorRecordsAreRetriedOnResume) {
    TempDir dir;
    const auto journal = dir / "run.journal";
    auto backend = mock();
    backend->fail_next(render_answer_prompt(questions[2].text).text, 100, MockBackend::Failure::Auth);
    LlmClient client(backend, quick());
    BatchOptions options;
    options.journal = journal;
    const auto first = verify_batch(questions, config(client), options);
    EXPECT_EQ(first.records[2].label, Outcome::Error);

    auto healthy = mock();
    LlmClient healthy_client(healthy, quick());
    options.resume = true;
    const auto second = verify_batch(questions, config(healthy_client), options);
    EXPECT_EQ(second.resumed, 9u);
    EXPECT_EQ(second.records[2].label, Outcome::NotRelated);
}

TEST_F(BatchTest, AnswerCacheSharedAcrossRetrievers) {
    TempDir dir;
    AnswerCache cache(dir / "answers.jsonl");
    auto backend = mock();
    LlmClient client(backend, quick());
    auto c1 = config(client);
    c1.answers = &cache;
    verify_batch(questions, c1, {});
    EXPECT_EQ(backend->calls_for(TemplateId::Answer), 10u);
    EXPECT_EQ(cache.size(), 10u);

    auto c2 = config(client, true);
    c2.answers = &cache;
    verify_batch(questions, c2, {});
    EXPECT_EQ(backend->calls_for(TemplateId::Answer), 10u);

    AnswerCache reloaded(dir / "answers.jsonl");
    EXPECT_EQ(reloaded.size(), 10u);
    auto c3 = config(client);
    c3.answers = &reloaded;
    verify_batch(questions, c3, {});
    EXPECT_EQ(backend->calls_for(TemplateId::Answer), 10u);
}

TEST_F(BatchTest, OnRecordSeesEveryComputedRecord) {
    auto backend = mock();
    LlmClient client(backend, quick());
    std::mutex m;
    std::set<std::string> qids;
    BatchOptions options;
    options.workers = 3;
    options.on_record = [&](const VerificationRecord& r) {
        std::lock_guard lock(m);
        qids.insert(r.qid);
    };
    verify_batch(questions, config(client), options);
    EXPECT_EQ(qids.size(), 10u);
}
