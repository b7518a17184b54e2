#include "run_config.hpp"

#include <gtest/gtest.h>

#include "qfsum/error.hpp"

namespace qfsum::cli {
namespace {

std::string message_of(std::string_view json) {
  try {
    parse_run_config(json);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(RunConfig, DefaultsFollowReportedSettings) {
  const RunConfig c = parse_run_config("{}");
  EXPECT_EQ(c.train.dropout, 0.6);
  EXPECT_EQ(c.train.epochs, 1);
  EXPECT_EQ(c.train.learning_rate, 1e-3);
  EXPECT_EQ(c.train.batch_size, 32u);
  EXPECT_EQ(c.train.hidden, 50u);
  EXPECT_EQ(c.limits.per_doc, 3u);
  EXPECT_EQ(c.limits.snippet_limit, 10u);
  EXPECT_EQ(c.limits.label_k, 5u);
  EXPECT_EQ(c.folds, 10u);
  EXPECT_EQ(c.answer.n_for(QuestionType::summary), 6);
}

TEST(RunConfig, ParsesFields) {
  const RunConfig c = parse_run_config(R"({
    "paths": {"training": "t.json", "output_dir": "out"},
    "similarity": "sbert", "sorting": "local", "embedder": "store",
    "seed": 18446744073709551615, "train": {"epochs": 4, "normalize_position": true},
    "answer": {"list": 5}, "window": {"mode": "drop-last", "fractions": [0.25]},
    "synthetic": {"questions": 12, "inverted_fraction": 0.5}
  })");
  EXPECT_EQ(c.paths.training, "t.json");
  EXPECT_EQ(c.similarity, SimilarityBackend::dense);
  EXPECT_EQ(c.sorting, SortingMode::local);
  EXPECT_EQ(c.embedder, Embedder::store);
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.train.epochs, 4);
  EXPECT_TRUE(c.train.normalize_position);
  EXPECT_EQ(c.answer.n_for(QuestionType::list), 5);
  EXPECT_EQ(c.window_mode, WindowMode::drop_last);
  EXPECT_EQ(c.fractions, std::vector<double>{0.25});
  EXPECT_EQ(c.synthetic, 12u);
}

TEST(RunConfig, ErrorsNameTheField) {
  EXPECT_NE(message_of(R"({"train": {"epochs": "x"}})").find("train.epochs"), std::string::npos);
  EXPECT_NE(message_of(R"({"limits": {"per_dok": 1}})").find("limits.per_dok"), std::string::npos);
  EXPECT_NE(message_of(R"({"sorting": "random"})").find("sorting"), std::string::npos);
  EXPECT_NE(message_of(R"({"seed": -1})").find("seed"), std::string::npos);
  EXPECT_NE(message_of(R"({"limits": {"k_docs": 0}})").find("limits.k_docs"), std::string::npos);
  EXPECT_NE(message_of(R"({"window": {"fractions": [2]}})").find("window.fractions"), std::string::npos);
  EXPECT_FALSE(message_of("[").empty());
}

TEST(RunConfig, EchoRoundTripsAndManifestIsAConfig) {
  RunConfig c;
  c.seed = 9;
  c.train.hidden = 12;
  c.paths.output_dir = "somewhere";
  const std::string echo = run_config_to_json(c);
  EXPECT_EQ(echo.find("somewhere"), std::string::npos);
  EXPECT_EQ(run_config_to_json(parse_run_config(echo)), echo);
  const std::string manifest = R"({"command": "xval", "seed": 9, "config": )" + echo + "}";
  EXPECT_EQ(run_config_to_json(parse_run_config(manifest)), echo);
}

TEST(FractionList, Parses) {
  EXPECT_EQ(parse_fraction_list("0.1,0.5,1"), (std::vector<double>{0.1, 0.5, 1.0}));
  EXPECT_THROW(parse_fraction_list("0.1,,0.2"), Error);
  EXPECT_THROW(parse_fraction_list("abc"), Error);
}

}  // namespace
}  // namespace qfsum::cli
