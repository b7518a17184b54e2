#include "qfsum/pipeline.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "qfsum/error.hpp"
#include "qfsum/synthetic.hpp"

namespace qfsum {
namespace {

std::vector<SnippetRef> numbered(std::size_t n) {
  std::vector<SnippetRef> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"d", "s" + std::to_string(i + 1), static_cast<int>(i) + 1});
  return out;
}

std::vector<int> positions(const AnswerResult& r) {
  std::vector<int> out;
  for (const auto& s : r.chosen) out.push_back(s.list_position);
  return out;
}

TEST(Assemble, FactoidTakesTwo) {
  const Question q{"q", "", QuestionType::factoid};
  const auto c = numbered(5);
  const std::vector<double> scores{0.1, 0.9, 0.3, 0.8, 0.2};
  const auto r = assemble_answer(q, c, scores);
  EXPECT_EQ(positions(r), (std::vector<int>{2, 4}));
  EXPECT_EQ(r.answer_text, "s2 s4");
}

TEST(Assemble, SummaryWithFewCandidatesTakesAll) {
  const Question q{"q", "", QuestionType::summary};
  const auto c = numbered(4);
  const std::vector<double> scores{0.4, 0.1, 0.3, 0.2};
  const auto r = assemble_answer(q, c, scores);
  EXPECT_EQ(positions(r), (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(r.answer_text, "s1 s2 s3 s4");
}

TEST(Assemble, TiesGoToLowerPosition) {
  const Question q{"q", "", QuestionType::yesno};
  const auto c = numbered(4);
  const std::vector<double> scores{0.5, 0.5, 0.5, 0.5};
  EXPECT_EQ(positions(assemble_answer(q, c, scores)), (std::vector<int>{1, 2}));
}

TEST(Assemble, EmptyAndMisaligned) {
  const Question q{"q", "", QuestionType::list};
  const auto r = assemble_answer(q, std::vector<SnippetRef>{}, std::vector<double>{});
  EXPECT_TRUE(r.chosen.empty());
  EXPECT_EQ(r.answer_text, "");
  EXPECT_THROW(assemble_answer(q, numbered(2), std::vector<double>{1.0}), Error);
}

TEST(Assemble, MatchesBruteForceTopN) {
  const std::vector<QuestionType> types{QuestionType::summary, QuestionType::factoid, QuestionType::yesno,
                                        QuestionType::list};
  const AnswerConfig cfg;
  std::uint64_t state = 8;
  for (int trial = 0; trial < 200; ++trial) {
    state = splitmix64(state);
    const std::size_t n = state % 13;
    const auto c = numbered(n);
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      state = splitmix64(state);
      scores.push_back(static_cast<double>(state % 5) / 4.0);
    }
    const QuestionType t = types[trial % 4];
    const auto r = assemble_answer(Question{"q", "", t}, c, scores, cfg);
    const auto expected = testing::brute_force_top_n(scores, static_cast<std::size_t>(cfg.n_for(t)));
    ASSERT_EQ(r.chosen.size(), std::min<std::size_t>(cfg.n_for(t), n));
    for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_EQ(r.chosen[k], c[expected[k]]);
  }
}

TEST(AnswerConfig, DefaultLengths) {
  const AnswerConfig cfg;
  EXPECT_EQ(cfg.n_for(QuestionType::summary), 6);
  EXPECT_EQ(cfg.n_for(QuestionType::factoid), 2);
  EXPECT_EQ(cfg.n_for(QuestionType::yesno), 2);
  EXPECT_EQ(cfg.n_for(QuestionType::list), 3);
  AnswerConfig bad;
  bad.n_per_type[QuestionType::list] = 0;
  EXPECT_THROW(bad.validate(), Error);
}

TrainingExample gold(std::string id, std::string ideal) {
  TrainingExample ex;
  ex.question = {std::move(id), "body", QuestionType::summary};
  ex.ideal_answers = {std::move(ideal)};
  return ex;
}

AnswerResult prediction(std::string id, std::string text) {
  AnswerResult r;
  r.question_id = std::move(id);
  r.answer_text = std::move(text);
  return r;
}

TEST(Evaluate, Means) {
  const std::vector<TrainingExample> g{gold("a", "x y z"), gold("b", "p q")};
  EXPECT_EQ(evaluate_answers(std::vector<AnswerResult>{prediction("a", "x y z"), prediction("b", "p q")}, g).mean_f1, 1.0);
  EXPECT_EQ(evaluate_answers(std::vector<AnswerResult>{prediction("a", "m"), prediction("b", "n")}, g).mean_f1, 0.0);
  const std::vector<TrainingExample> g2{gold("a", "a b c"), gold("b", "p q")};
  const std::vector<AnswerResult> half{prediction("a", "a b d"), prediction("b", "p q")};
  EXPECT_EQ(evaluate_answers(half, g2).mean_f1, 0.75);
  const std::vector<AnswerResult> swapped{half[1], half[0]};
  EXPECT_EQ(evaluate_answers(swapped, g2).mean_f1, 0.75);
}

TEST(Evaluate, IdsMustMatch) {
  const std::vector<TrainingExample> g{gold("a", "x"), gold("b", "y")};
  EXPECT_THROW(evaluate_answers(std::vector<AnswerResult>{prediction("a", "x")}, g), Error);
  EXPECT_THROW(evaluate_answers(std::vector<AnswerResult>{prediction("a", "x"), prediction("c", "y")}, g), Error);
  EXPECT_THROW(evaluate_answers(std::vector<AnswerResult>{prediction("a", "x"), prediction("a", "y")}, g), Error);
}

TEST(DocumentF1, Examples) {
  const auto s = document_f1({"a", "b", "c", "d"}, {"a", "b", "e"});
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
  EXPECT_NEAR(s.f1, 0.5714285714285715, 1e-15);
  EXPECT_EQ(document_f1({}, {}).f1, 1.0);
  EXPECT_EQ(document_f1({"a"}, {}).f1, 0.0);
}

TEST(SnippetF1, CharacterOverlap) {
  const std::vector<Document> docs{{"d", "Title", "0123456789"}};
  const std::vector<SnippetRef> gold_spans{{"d", "0123456789", 1}};
  const std::vector<SnippetRef> half{{"d", "01234", 1}};
  const auto s = snippet_f1(half, gold_spans, docs);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 0.5);
  EXPECT_NEAR(s.f1, 2.0 / 3.0, 1e-15);

  // Overlapping predictions are merged before counting.
  const std::vector<SnippetRef> overlapping{{"d", "01234", 1}, {"d", "34567", 2}};
  EXPECT_NEAR(snippet_f1(overlapping, gold_spans, docs).recall, 0.8, 1e-15);

  const std::vector<SnippetRef> unknown{{"zz", "x", 1}};
  EXPECT_THROW(snippet_f1(unknown, gold_spans, docs), Error);
  const std::vector<SnippetRef> unlocated{{"d", "not there", 1}};
  EXPECT_EQ(snippet_f1(unlocated, gold_spans, docs).precision, 0.0);

  const std::vector<SnippetRef> loose{{"d", "  0123456789 ", 1}};
  EXPECT_EQ(snippet_f1(loose, gold_spans, docs, SnippetMatch::exact).f1, 1.0);
}

TEST(Folds, PartitionProperties) {
  for (std::size_t n = 10; n < 40; n += 7) {
    for (const auto order : {FoldOrder::shuffled, FoldOrder::chronological}) {
      const auto folds = fold_partition(n, 10, 3, order);
      ASSERT_EQ(folds.size(), 10u);
      std::set<std::size_t> all;
      std::size_t lo = n, hi = 0;
      for (const auto& f : folds) {
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
        all.insert(f.begin(), f.end());
      }
      EXPECT_LE(hi - lo, 1u);
      EXPECT_EQ(all.size(), n);
    }
  }
  EXPECT_EQ(fold_partition(20, 4, 0, FoldOrder::chronological)[0], (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(fold_partition(20, 4, 9, FoldOrder::shuffled), fold_partition(20, 4, 9, FoldOrder::shuffled));
  EXPECT_NE(fold_partition(20, 4, 9, FoldOrder::shuffled), fold_partition(20, 4, 10, FoldOrder::shuffled));
  EXPECT_THROW(fold_partition(3, 4, 0, FoldOrder::shuffled), Error);
  EXPECT_THROW(fold_partition(3, 1, 0, FoldOrder::shuffled), Error);
}

struct CvFixture : ::testing::Test {
  // One relevant snippet per answer slot, so a perfect scorer reaches F1 = 1.
  std::vector<TrainingExample> data = make_synthetic_dataset(SyntheticSpec{
      .questions = 40,
      .relevant_per_type = {{QuestionType::summary, 6}, {QuestionType::factoid, 2}, {QuestionType::yesno, 2},
                            {QuestionType::list, 3}}});
  CvConfig cv;
  TrainConfig train;
  PairEmbeddings emb;

  void SetUp() override {
    cv.folds = 5;
    cv.seed = 1;
    train.epochs = 30;
    train.dropout = 0.0;
    train.hidden = 16;
  }
};

TEST_F(CvFixture, DeterministicAcrossThreadCounts) {
  const auto a = crossvalidate(data, cv, train, AnswerConfig{}, emb);
  cv.threads = 3;
  const auto b = crossvalidate(data, cv, train, AnswerConfig{}, emb);
  EXPECT_EQ(report_to_json(a.report), report_to_json(b.report));
  ASSERT_EQ(a.answers.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(a.answers[i].answer_text, b.answers[i].answer_text);
}

TEST_F(CvFixture, CleanLabelsScoreHigh) {
  const auto r = crossvalidate(data, cv, train, AnswerConfig{}, emb);
  EXPECT_GE(r.report.mean_f1, 0.9);
  EXPECT_EQ(r.report.fold_means.size(), 5u);
  for (const auto& q : r.report.per_question) EXPECT_GE(q.fold, 0);
}

TEST_F(CvFixture, WindowAtZeroEqualsPlainCv) {
  const auto plain = crossvalidate(data, cv, train, AnswerConfig{}, emb);
  const std::vector<double> fractions{0.0, 0.5};
  const auto rows = run_window_experiment(data, fractions, WindowMode::drop_first, cv, train, AnswerConfig{}, emb);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].mean_f1, plain.report.mean_f1);
  EXPECT_EQ(rows[0].examples, 40u);
  EXPECT_EQ(rows[1].examples, 20u);
  const std::string table = window_to_table(rows);
  EXPECT_NE(table.find("Percentage removed | ROUGE-SU4 F1"), std::string::npos);
  EXPECT_NE(table.find("50%"), std::string::npos);
  const std::vector<double> bad{1.5};
  EXPECT_THROW(run_window_experiment(data, bad, WindowMode::drop_first, cv, train, AnswerConfig{}, emb), Error);
}

TEST(PairEmbeddings, StoreThenFallback) {
  EmbeddingStore store;
  store.insert(pair_key("q1", 2), {1.0f, 2.0f, 3.0f});
  PairEmbeddings emb{&store, false, 64, 0};
  const Question q{"q1", "", QuestionType::summary};
  EXPECT_EQ(emb.dim(), 3u);
  EXPECT_EQ(emb.lookup(q, SnippetRef{"d", "text", 2}), (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_THROW(emb.lookup(q, SnippetRef{"d", "text", 1}), Error);
  emb.hash_fallback = true;
  EXPECT_EQ(emb.lookup(q, SnippetRef{"d", "text", 1}).size(), 3u);
}

TEST(Submission, RoundTrip) {
  std::vector<SubmissionEntry> entries{
      {"q1", {"d1", "d2"}, {{"d1", "First \"quoted\" ünï.", 1}, {"d2", "Second.", 2}}, std::string("Answer.")},
      {"q2", {}, {}, std::nullopt},
  };
  const std::string text = emit_submission(entries);
  EXPECT_EQ(parse_submission(text), entries);
  EXPECT_EQ(emit_submission(parse_submission(text)), text);
  EXPECT_EQ(emit_submission(std::vector<SubmissionEntry>{}), "{\n  \"questions\": []\n}\n");
  EXPECT_THROW(parse_submission("{}"), Error);
  EXPECT_THROW(parse_submission("{"), Error);
}

TEST(Reports, TableAndJson) {
  EvalReport r;
  r.per_question = {{"a", 0.5, false, 0}, {"b", 0.25, false, 1}};
  r.fold_means = {0.5, 0.25};
  r.mean_f1 = 0.375;
  const std::string table = report_to_table(r);
  EXPECT_NE(table.find("0.375"), std::string::npos);
  EXPECT_EQ(report_to_json(r), report_to_json(r));
  EXPECT_NE(report_to_json(r).find("\"a\""), std::string::npos);
}

}  // namespace
}  // namespace qfsum
