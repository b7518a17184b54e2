#include "qfsum/retrieval.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "qfsum/error.hpp"

namespace qfsum {
namespace {

void require_positive(std::size_t value, const char* what) {
  if (value < 1) throw Error(ErrorKind::invalid_argument, std::string(what) + " must be >= 1");
}

bool by_similarity_then_position(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  if (a.doc_rank != b.doc_rank) return a.doc_rank < b.doc_rank;
  return a.sentence.index_in_doc < b.sentence.index_in_doc;
}

}  // namespace

SimilarityBackend parse_similarity_backend(std::string_view name) {
  if (name == "tfidf") return SimilarityBackend::tfidf;
  if (name == "dense" || name == "sbert") return SimilarityBackend::dense;
  throw Error(ErrorKind::invalid_argument, "unknown similarity backend '" + std::string(name) + "'");
}

std::string_view to_string(SimilarityBackend backend) noexcept {
  return backend == SimilarityBackend::tfidf ? "tfidf" : "dense";
}

SortingMode parse_sorting_mode(std::string_view name) {
  if (name == "local") return SortingMode::local;
  if (name == "global") return SortingMode::global;
  throw Error(ErrorKind::invalid_argument, "unknown sorting mode '" + std::string(name) + "'");
}

std::string_view to_string(SortingMode mode) noexcept {
  return mode == SortingMode::local ? "local" : "global";
}

DocumentRetriever::DocumentRetriever(std::vector<Document> corpus) : corpus_(std::move(corpus)) {
  if (corpus_.empty()) throw Error(ErrorKind::invalid_argument, "document retrieval needs a non-empty corpus");
  std::vector<TokenList> tokens;
  tokens.reserve(corpus_.size());
  for (const auto& doc : corpus_) {
    by_id_.emplace(doc.id, by_id_.size());
    tokens.push_back(tokenize(doc.title + " " + doc.text));
  }
  model_ = TfidfModel::fit(tokens);
  vectors_.reserve(tokens.size());
  for (const auto& t : tokens) vectors_.push_back(model_.vectorize(t));
}

RankedDocuments DocumentRetriever::retrieve(const Question& question, std::size_t k) const {
  require_positive(k, "k");
  const SparseVector query = model_.vectorize(tokenize(question.body));
  RankedDocuments hits;
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    const double s = cosine(query, vectors_[i]);
    if (s > 0.0) hits.push_back({corpus_[i].id, s});
  }
  std::sort(hits.begin(), hits.end(), [](const RankedDocument& a, const RankedDocument& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.document_id < b.document_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

const Document* DocumentRetriever::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &corpus_[it->second];
}

RankedDocuments retrieve_documents(std::span<const Document> corpus, const Question& question,
                                   std::size_t k) {
  return DocumentRetriever({corpus.begin(), corpus.end()}).retrieve(question, k);
}

std::vector<ScoredCandidate> candidate_sentences(std::span<const Document> ranked_docs) {
  std::vector<ScoredCandidate> out;
  for (std::size_t rank = 0; rank < ranked_docs.size(); ++rank) {
    for (auto& s : split_sentences(ranked_docs[rank])) {
      out.push_back(ScoredCandidate{std::move(s), rank + 1, 0.0});
    }
  }
  return out;
}

std::vector<double> DenseEmbeddings::lookup(std::string_view key, std::string_view text) const {
  if (store != nullptr) {
    if (const auto v = store->find(key)) return {v->begin(), v->end()};
  }
  if (hash_fallback) {
    const std::size_t dim = (store != nullptr && store->dim() > 0) ? store->dim() : hash_dim;
    return hash_embed(text, dim, seed);
  }
  throw Error(ErrorKind::missing_embedding, "no embedding for key '" + std::string(key) + "'");
}

std::string sentence_key(const Sentence& sentence) {
  return sentence.doc_id + "#" + std::to_string(sentence.index_in_doc);
}

std::vector<ScoredCandidate> score_similarity(SimilarityBackend backend, const Question& question,
                                              std::vector<ScoredCandidate> candidates,
                                              const DenseEmbeddings& dense) {
  if (backend == SimilarityBackend::tfidf) {
    std::vector<TokenList> tokens;
    tokens.reserve(candidates.size() + 1);
    tokens.push_back(tokenize(question.body));
    for (const auto& c : candidates) tokens.push_back(tokenize(c.sentence.text));
    const TfidfModel model = TfidfModel::fit(tokens);
    const SparseVector q = model.vectorize(tokens.front());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      candidates[i].similarity = cosine(q, model.vectorize(tokens[i + 1]));
    }
    return candidates;
  }
  const std::vector<double> q = dense.lookup(question.id, question.body);
  for (auto& c : candidates) {
    const std::vector<double> v = dense.lookup(sentence_key(c.sentence), c.sentence.text);
    c.similarity = cosine(std::span<const double>(q), std::span<const double>(v));
  }
  return candidates;
}

RankedSnippets rerank_local(std::span<const ScoredCandidate> scored, std::size_t per_doc) {
  std::map<std::size_t, std::vector<ScoredCandidate>> by_doc;
  for (const auto& c : scored) by_doc[c.doc_rank].push_back(c);
  RankedSnippets out;
  for (auto& [rank, group] : by_doc) {
    std::stable_sort(group.begin(), group.end(), by_similarity_then_position);
    const std::size_t take = std::min(per_doc, group.size());
    out.insert(out.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

RankedSnippets rerank_global(std::span<const ScoredCandidate> scored) {
  RankedSnippets out(scored.begin(), scored.end());
  std::stable_sort(out.begin(), out.end(), by_similarity_then_position);
  return out;
}

RankedSnippets rerank(SortingMode mode, std::span<const ScoredCandidate> scored, std::size_t per_doc) {
  return mode == SortingMode::local ? rerank_local(scored, per_doc) : rerank_global(scored);
}

RankedSnippets dedup_and_take(std::span<const ScoredCandidate> ranked, const FeedbackSet& feedback,
                              std::size_t limit) {
  require_positive(limit, "limit");
  RankedSnippets out;
  for (const auto& c : ranked) {
    if (out.size() >= limit) break;
    if (feedback.contains_snippet(c.sentence.doc_id, c.sentence.text)) continue;
    out.push_back(c);
  }
  return out;
}

RankedDocuments dedup_documents(std::span<const RankedDocument> ranked, const FeedbackSet& feedback,
                                std::size_t limit) {
  require_positive(limit, "limit");
  RankedDocuments out;
  for (const auto& d : ranked) {
    if (out.size() >= limit) break;
    if (feedback.contains_document(d.document_id)) continue;
    out.push_back(d);
  }
  return out;
}

std::vector<SnippetRef> to_snippet_list(std::span<const ScoredCandidate> ranked) {
  std::vector<SnippetRef> out;
  out.reserve(ranked.size());
  for (const auto& c : ranked) {
    out.push_back(SnippetRef{c.sentence.doc_id, c.sentence.text, static_cast<int>(out.size()) + 1});
  }
  return out;
}

}  // namespace qfsum
