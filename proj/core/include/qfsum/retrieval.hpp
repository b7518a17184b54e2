#pragma once

// Document retrieval over a local corpus and question-focused reranking of
// candidate sentences, with feedback deduplication.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qfsum/corpus.hpp"
#include "qfsum/textproc.hpp"
#include "qfsum/vecspace.hpp"

namespace qfsum {

enum class SimilarityBackend { tfidf, dense };
enum class SortingMode { local, global };

// Accepts "tfidf" and "dense" ("sbert" is an alias of dense).
SimilarityBackend parse_similarity_backend(std::string_view name);
std::string_view to_string(SimilarityBackend backend) noexcept;
SortingMode parse_sorting_mode(std::string_view name);
std::string_view to_string(SortingMode mode) noexcept;

struct RankedDocument {
  std::string document_id;
  double score = 0.0;
};
using RankedDocuments = std::vector<RankedDocument>;

struct ScoredCandidate {
  Sentence sentence;
  std::size_t doc_rank = 1;  // 1-based retrieval rank of the source document
  double similarity = 0.0;
};
using RankedSnippets = std::vector<ScoredCandidate>;

// Corpus-wide tf.idf index. The query is the unmodified question body.
class DocumentRetriever {
 public:
  explicit DocumentRetriever(std::vector<Document> corpus);

  // Top k by cosine, ties by id; zero-similarity documents are dropped.
  RankedDocuments retrieve(const Question& question, std::size_t k) const;

  const Document* find(std::string_view id) const;
  const std::vector<Document>& documents() const { return corpus_; }

 private:
  std::vector<Document> corpus_;
  TfidfModel model_;
  std::vector<SparseVector> vectors_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

RankedDocuments retrieve_documents(std::span<const Document> corpus, const Question& question,
                                   std::size_t k);

// All sentences of all documents; doc_rank follows the input order.
std::vector<ScoredCandidate> candidate_sentences(std::span<const Document> ranked_docs);

// Where dense vectors come from: a store, the hash embedder, or a store
// backed by the hash embedder for missing keys. Question vectors are keyed
// by question id, sentences by "<doc_id>#<index_in_doc>".
struct DenseEmbeddings {
  const EmbeddingStore* store = nullptr;
  bool hash_fallback = false;
  std::size_t hash_dim = 64;
  std::uint64_t seed = 0;

  std::vector<double> lookup(std::string_view key, std::string_view text) const;
};

std::string sentence_key(const Sentence& sentence);

// Fills `similarity`; order unchanged. The tfidf backend fits a model on
// the question plus its candidate sentences.
std::vector<ScoredCandidate> score_similarity(SimilarityBackend backend, const Question& question,
                                              std::vector<ScoredCandidate> candidates,
                                              const DenseEmbeddings& dense = {});

RankedSnippets rerank_local(std::span<const ScoredCandidate> scored, std::size_t per_doc = 3);
RankedSnippets rerank_global(std::span<const ScoredCandidate> scored);
RankedSnippets rerank(SortingMode mode, std::span<const ScoredCandidate> scored, std::size_t per_doc = 3);

RankedSnippets dedup_and_take(std::span<const ScoredCandidate> ranked, const FeedbackSet& feedback,
                              std::size_t limit = 10);
RankedDocuments dedup_documents(std::span<const RankedDocument> ranked, const FeedbackSet& feedback,
                                std::size_t limit = 10);

// Snippet list with list_position 1..n in ranked order.
std::vector<SnippetRef> to_snippet_list(std::span<const ScoredCandidate> ranked);

}  // namespace qfsum
