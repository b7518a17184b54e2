#include "qfsum/retrieval.hpp"

#include <gtest/gtest.h>

#include <map>

#include "qfsum/error.hpp"
#include "qfsum/vecspace.hpp"

namespace qfsum {
namespace {

std::vector<Document> corpus() {
  return {
      {"d1", "Orteronel", "Orteronel inhibits androgen synthesis. It was tested in prostate cancer."},
      {"d2", "Weather", "Rain is expected tomorrow. Winds will be strong."},
      {"d3", "Prostate cancer", "Prostate cancer treatment includes androgen deprivation."},
  };
}

ScoredCandidate cand(std::string doc, std::size_t index, std::size_t rank, double sim) {
  return ScoredCandidate{Sentence{doc + "-s" + std::to_string(index), doc, index}, rank, sim};
}

TEST(Retrieval, RanksByCosineAndDropsZeros) {
  const Question q{"q1", "Orteronel for prostate cancer?", QuestionType::yesno};
  const auto hits = retrieve_documents(corpus(), q, 10);
  ASSERT_EQ(hits.size(), 2u);  // d2 shares no term
  EXPECT_EQ(hits[0].document_id, "d1");
  EXPECT_EQ(hits[1].document_id, "d3");
  EXPECT_GE(hits[0].score, hits[1].score);
  EXPECT_EQ(retrieve_documents(corpus(), q, 1).size(), 1u);
  EXPECT_THROW(retrieve_documents(corpus(), q, 0), Error);
}

TEST(Retrieval, TiesBrokenById) {
  const std::vector<Document> docs{{"b", "", "same words"}, {"a", "", "same words"}, {"c", "", "other"}};
  const auto hits = retrieve_documents(docs, Question{"q", "same", QuestionType::summary}, 5);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].document_id, "a");
  EXPECT_EQ(hits[1].document_id, "b");
}

TEST(Retrieval, FindById) {
  const DocumentRetriever retriever(corpus());
  ASSERT_NE(retriever.find("d2"), nullptr);
  EXPECT_EQ(retriever.find("d2")->title, "Weather");
  EXPECT_EQ(retriever.find("zz"), nullptr);
}

TEST(Candidates, DocRanksFollowInputOrder) {
  const std::vector<Document> docs{{"x", "", "One here. Two here."}, {"y", "", "Three here. Four here."}};
  const auto c = candidate_sentences(docs);
  ASSERT_EQ(c.size(), 4u);
  std::vector<std::size_t> ranks;
  for (const auto& s : c) ranks.push_back(s.doc_rank);
  EXPECT_EQ(ranks, (std::vector<std::size_t>{1, 1, 2, 2}));
  EXPECT_EQ(sentence_key(c[3].sentence), "y#1");
}

TEST(Similarity, TfidfExamples) {
  const Question q{"q", "androgen synthesis", QuestionType::summary};
  std::vector<ScoredCandidate> c{cand("d", 0, 1, 0), cand("d", 1, 1, 0), cand("d", 2, 1, 0)};
  c[0].sentence.text = "androgen synthesis";
  c[1].sentence.text = "androgen levels";
  c[2].sentence.text = "rain tomorrow";
  const auto s = score_similarity(SimilarityBackend::tfidf, q, c);
  EXPECT_NEAR(s[0].similarity, 1.0, 1e-12);
  EXPECT_GT(s[1].similarity, 0.0);
  EXPECT_LT(s[1].similarity, 1.0);
  EXPECT_EQ(s[2].similarity, 0.0);
  EXPECT_EQ(s[1].sentence.text, "androgen levels");  // order kept
}

TEST(Similarity, DenseFromStoreAndFallback) {
  EmbeddingStore store;
  store.insert("q", {1.0f, 0.0f});
  store.insert("d#0", {1.0f, 1.0f});
  store.insert("d#1", {0.0f, 1.0f});
  const Question q{"q", "anything", QuestionType::summary};
  std::vector<ScoredCandidate> c{cand("d", 0, 1, 0), cand("d", 1, 1, 0)};
  DenseEmbeddings dense{&store, false, 64, 0};
  const auto s = score_similarity(SimilarityBackend::dense, q, c, dense);
  EXPECT_NEAR(s[0].similarity, 0.7071067811865475, 1e-7);
  EXPECT_EQ(s[1].similarity, 0.0);

  c.push_back(cand("d", 2, 1, 0));
  try {
    score_similarity(SimilarityBackend::dense, q, c, dense);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::missing_embedding);
    EXPECT_NE(std::string(e.what()).find("d#2"), std::string::npos);
  }
  dense.hash_fallback = true;
  EXPECT_NO_THROW(score_similarity(SimilarityBackend::dense, q, c, dense));
}

TEST(Similarity, BackendNames) {
  EXPECT_EQ(parse_similarity_backend("sbert"), SimilarityBackend::dense);
  EXPECT_EQ(parse_similarity_backend("tfidf"), SimilarityBackend::tfidf);
  EXPECT_THROW(parse_similarity_backend("bm25"), Error);
  EXPECT_EQ(parse_sorting_mode("local"), SortingMode::local);
  EXPECT_THROW(parse_sorting_mode("random"), Error);
}

TEST(Rerank, GlobalSortsBySimilarity) {
  const std::vector<ScoredCandidate> c{cand("a", 0, 1, 0.2), cand("a", 1, 1, 0.9), cand("b", 0, 2, 0.5),
                                       cand("b", 1, 2, 0.9)};
  const auto g = rerank_global(c);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0].sentence.text, "a-s1");  // tie at 0.9 goes to the better-ranked document
  EXPECT_EQ(g[1].sentence.text, "b-s1");
  EXPECT_EQ(g[2].sentence.text, "b-s0");
  EXPECT_EQ(g[3].sentence.text, "a-s0");
}

TEST(Rerank, LocalTakesTopThreePerDocumentInRankOrder) {
  std::vector<ScoredCandidate> c;
  for (std::size_t i = 0; i < 5; ++i) c.push_back(cand("b", i, 2, 0.1 * static_cast<double>(i)));
  for (std::size_t i = 0; i < 2; ++i) c.push_back(cand("a", i, 1, 0.05 * static_cast<double>(i)));
  const auto l = rerank_local(c);
  ASSERT_EQ(l.size(), 5u);
  EXPECT_EQ(l[0].sentence.text, "a-s1");
  EXPECT_EQ(l[1].sentence.text, "a-s0");
  EXPECT_EQ(l[2].sentence.text, "b-s4");
  EXPECT_EQ(l[3].sentence.text, "b-s3");
  EXPECT_EQ(l[4].sentence.text, "b-s2");
}

std::vector<ScoredCandidate> random_candidates(std::uint64_t seed, std::size_t n) {
  std::vector<ScoredCandidate> out;
  std::uint64_t s = seed;
  std::map<std::size_t, std::size_t> next_index;
  for (std::size_t i = 0; i < n; ++i) {
    s = splitmix64(s);
    const std::size_t rank = 1 + s % 6;
    const double sim = static_cast<double>((s >> 16) % 11) / 10.0;  // plenty of ties
    out.push_back(cand("doc" + std::to_string(rank), next_index[rank]++, rank, sim));
  }
  return out;
}

TEST(Rerank, Invariants) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto c = random_candidates(seed, 40);
    const auto g = rerank_global(c);
    ASSERT_EQ(g.size(), c.size());
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GE(g[i - 1].similarity, g[i].similarity);

    const auto l = rerank_local(c);
    std::map<std::size_t, std::size_t> per_doc;
    for (std::size_t i = 0; i < l.size(); ++i) {
      EXPECT_LE(++per_doc[l[i].doc_rank], 3u);
      if (i > 0) {
        EXPECT_LE(l[i - 1].doc_rank, l[i].doc_rank);
        if (l[i - 1].doc_rank == l[i].doc_rank) EXPECT_GE(l[i - 1].similarity, l[i].similarity);
      }
    }
    EXPECT_EQ(rerank(SortingMode::global, c).size(), g.size());
  }
}

TEST(Dedup, SkipsFeedbackAndCaps) {
  std::vector<ScoredCandidate> c;
  for (std::size_t i = 0; i < 15; ++i) c.push_back(cand("d", i, 1, 1.0 - 0.01 * static_cast<double>(i)));
  FeedbackSet fb;
  fb.add_snippet("d", "D-S0");  // normalized comparison
  fb.add_snippet("d", "d-s3");
  fb.add_snippet("other", "d-s4");
  const auto out = dedup_and_take(c, fb);
  ASSERT_EQ(out.size(), 10u);
  EXPECT_EQ(out[0].sentence.text, "d-s1");
  EXPECT_EQ(out[2].sentence.text, "d-s4");
  for (const auto& x : out) EXPECT_FALSE(fb.contains_snippet(x.sentence.doc_id, x.sentence.text));
  EXPECT_EQ(dedup_and_take(c, fb, 3).size(), 3u);

  const RankedDocuments docs{{"a", 0.9}, {"b", 0.8}, {"c", 0.7}};
  fb.add_document("b");
  const auto kept = dedup_documents(docs, fb);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[1].document_id, "c");
}

TEST(Dedup, InvariantsOverRandomFeedback) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto c = random_candidates(seed, 30);
    FeedbackSet fb;
    for (std::size_t i = 0; i < c.size(); i += 1 + seed % 3) fb.add_snippet(c[i].sentence.doc_id, c[i].sentence.text);
    const auto out = dedup_and_take(c, fb);
    EXPECT_LE(out.size(), 10u);
    for (const auto& x : out) EXPECT_FALSE(fb.contains_snippet(x.sentence.doc_id, x.sentence.text));
  }
}

TEST(SnippetList, PositionsAreOneBased) {
  const std::vector<ScoredCandidate> c{cand("a", 0, 1, 0.2), cand("b", 3, 2, 0.1)};
  const auto list = to_snippet_list(c);
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0], (SnippetRef{"a", "a-s0", 1}));
  EXPECT_EQ(list[1], (SnippetRef{"b", "b-s3", 2}));
}

}  // namespace
}  // namespace qfsum
