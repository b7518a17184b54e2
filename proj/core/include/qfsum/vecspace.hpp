#pragma once

// Similarity backends: smoothed tf.idf sparse vectors, stored dense
// embeddings, cosine similarity, and a deterministic hash embedder used
// when no exported embeddings are available.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qfsum/textproc.hpp"

namespace qfsum {

struct SparseVector {
  // Sorted by strictly increasing index.
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool is_zero() const { return entries.empty(); }
  double norm() const;
};

class TfidfModel {
 public:
  // idf(t) = ln((1 + N) / (1 + df(t))) + 1. Column indices follow the
  // lexicographic order of the vocabulary. Throws on empty input.
  static TfidfModel fit(std::span<const TokenList> sentences);

  std::size_t doc_count() const { return doc_count_; }
  std::size_t vocabulary_size() const { return idf_.size(); }
  std::optional<std::uint32_t> index_of(std::string_view token) const;
  std::optional<double> idf(std::string_view token) const;
  const std::vector<double>& idf_table() const { return idf_; }
  const std::map<std::string, std::uint32_t, std::less<>>& vocabulary() const { return vocabulary_; }

  // Raw counts times idf, L2-normalized unless all-zero; unknown tokens ignored.
  SparseVector vectorize(const TokenList& tokens) const;

 private:
  std::map<std::string, std::uint32_t, std::less<>> vocabulary_;
  std::vector<double> idf_;
  std::size_t doc_count_ = 0;
};

inline TfidfModel fit_tfidf(std::span<const TokenList> sentences) { return TfidfModel::fit(sentences); }
inline SparseVector tfidf_vector(const TfidfModel& model, const TokenList& tokens) {
  return model.vectorize(tokens);
}

double dot(const SparseVector& u, const SparseVector& v);

// Cosine similarity; 0 when either vector has zero norm. The dense
// overloads throw Error(dimension_mismatch) on differing lengths.
double cosine(const SparseVector& u, const SparseVector& v);
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }

  // Throws on duplicate key or dimension mismatch. An empty store adopts the
  // dimension of its first vector.
  void insert(std::string key, std::vector<float> vector);

  std::optional<std::span<const float>> find(std::string_view key) const;
  std::vector<double> get(std::string_view key) const;  // throws missing_embedding
  bool contains(std::string_view key) const { return find(key).has_value(); }

  // Keys in insertion order.
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> keys_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Accepts the EMB1 binary layout or the JSONL alternative
// ({"key": str, "vector": [numbers]} per line).
EmbeddingStore open_embedding_store(std::string_view bytes);

// EMB1: "EMB1", u32 LE dimension, then per record u32 LE key length, key
// bytes, dim x f32 LE.
std::string write_emb1(const EmbeddingStore& store);
std::string write_embedding_jsonl(const EmbeddingStore& store);

// Each token maps to a pseudo-random unit vector from a counter-based
// generator keyed on (seed, token); the text vector is the L2-normalized
// mean. Texts without tokens give the zero vector.
std::vector<double> hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed);
std::vector<double> hash_embed(const TokenList& tokens, std::size_t dim, std::uint64_t seed);

// Little-endian helpers shared with the head model file format.
void append_u32_le(std::string& out, std::uint32_t v);
void append_f32_le(std::string& out, float v);
std::uint32_t read_u32_le(std::string_view bytes, std::size_t offset);
float read_f32_le(std::string_view bytes, std::size_t offset);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace qfsum
