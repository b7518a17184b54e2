#include "qfsum/vecspace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>

#include "json.hpp"
#include "qfsum/error.hpp"

namespace qfsum {
namespace {

constexpr std::string_view kEmbMagic = "EMB1";

template <typename T>
double dense_cosine(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "cosine of vectors with sizes " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  double uv = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    uv += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

// Uniform in (0, 1), never exactly 0.
double unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

EmbeddingStore parse_emb1(std::string_view bytes) {
  if (bytes.size() < 8) throw Error(ErrorKind::truncated_record, "EMB1 header is shorter than 8 bytes");
  const std::uint32_t dim = read_u32_le(bytes, 4);
  if (dim == 0) throw Error(ErrorKind::dimension_mismatch, "EMB1 header declares dimension 0");
  EmbeddingStore store(dim);
  std::size_t pos = 8;
  std::size_t record = 0;
  while (pos < bytes.size()) {
    const std::string at = "EMB1 record " + std::to_string(record);
    if (pos + 4 > bytes.size()) throw Error(ErrorKind::truncated_record, at + ": key length");
    const std::uint32_t key_len = read_u32_le(bytes, pos);
    pos += 4;
    if (pos + key_len > bytes.size()) throw Error(ErrorKind::truncated_record, at + ": key bytes");
    std::string key(bytes.substr(pos, key_len));
    pos += key_len;
    const std::size_t need = static_cast<std::size_t>(dim) * 4;
    if (pos + need > bytes.size()) {
      throw Error(ErrorKind::truncated_record, at + " ('" + key + "'): expected " + std::to_string(dim) +
                                                   " floats, found " + std::to_string((bytes.size() - pos) / 4));
    }
    std::vector<float> vec(dim);
    for (std::uint32_t k = 0; k < dim; ++k) vec[k] = read_f32_le(bytes, pos + 4 * k);
    pos += need;
    store.insert(std::move(key), std::move(vec));
    ++record;
  }
  return store;
}

EmbeddingStore parse_embedding_jsonl(std::string_view text) {
  EmbeddingStore store;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string at = "embedding line " + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::malformed_input, at + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("key") || !obj["key"].is_string() || !obj.contains("vector") ||
        !obj["vector"].is_array()) {
      throw Error(ErrorKind::malformed_input, at + ": expected {\"key\": str, \"vector\": [numbers]}");
    }
    std::vector<float> vec;
    for (const auto& x : obj["vector"]) {
      if (!x.is_number()) throw Error(ErrorKind::malformed_input, at + ": non-numeric vector entry");
      vec.push_back(x.get<float>());
    }
    if (vec.empty()) throw Error(ErrorKind::dimension_mismatch, at + ": empty vector");
    store.insert(obj["key"].get<std::string>(), std::move(vec));
  }
  return store;
}

}  // namespace

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& [i, w] : entries) s += w * w;
  return std::sqrt(s);
}

TfidfModel TfidfModel::fit(std::span<const TokenList> sentences) {
  if (sentences.empty()) throw Error(ErrorKind::invalid_argument, "fit_tfidf needs at least one sentence");
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& tokens : sentences) {
    std::vector<std::string_view> seen(tokens.begin(), tokens.end());
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (const auto t : seen) {
      auto it = df.find(t);
      if (it == df.end()) it = df.emplace(std::string(t), 0).first;
      ++it->second;
    }
  }
  TfidfModel model;
  model.doc_count_ = sentences.size();
  const double n = static_cast<double>(sentences.size());
  model.idf_.reserve(df.size());
  for (const auto& [token, count] : df) {
    model.vocabulary_.emplace(token, static_cast<std::uint32_t>(model.idf_.size()));
    model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return model;
}

std::optional<std::uint32_t> TfidfModel::index_of(std::string_view token) const {
  const auto it = vocabulary_.find(token);
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> TfidfModel::idf(std::string_view token) const {
  const auto idx = index_of(token);
  if (!idx) return std::nullopt;
  return idf_[*idx];
}

SparseVector TfidfModel::vectorize(const TokenList& tokens) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : tokens) {
    if (const auto idx = index_of(t)) counts[*idx] += 1.0;
  }
  SparseVector v;
  v.entries.reserve(counts.size());
  for (const auto& [idx, count] : counts) v.entries.emplace_back(idx, count * idf_[idx]);
  const double n = v.norm();
  if (n > 0.0) {
    for (auto& [idx, w] : v.entries) w /= n;
  }
  return v;
}

double dot(const SparseVector& u, const SparseVector& v) {
  double s = 0.0;
  auto a = u.entries.begin();
  auto b = v.entries.begin();
  while (a != u.entries.end() && b != v.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      s += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return s;
}

double cosine(const SparseVector& u, const SparseVector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot(u, v) / (nu * nv);
}

double cosine(std::span<const double> u, std::span<const double> v) { return dense_cosine(u, v); }
double cosine(std::span<const float> u, std::span<const float> v) { return dense_cosine(u, v); }

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {}

void EmbeddingStore::insert(std::string key, std::vector<float> vector) {
  if (vector.empty()) throw Error(ErrorKind::dimension_mismatch, "embedding '" + key + "' is empty");
  if (dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_) {
    throw Error(ErrorKind::dimension_mismatch, "embedding '" + key + "' has dimension " +
                                                   std::to_string(vector.size()) + ", store has " +
                                                   std::to_string(dim_));
  }
  for (const float x : vector) {
    if (!std::isfinite(x)) throw Error(ErrorKind::malformed_input, "embedding '" + key + "' has a non-finite entry");
  }
  if (index_.count(key) > 0) throw Error(ErrorKind::duplicate_id, "embedding key '" + key + "'");
  index_.emplace(key, keys_.size());
  keys_.push_back(std::move(key));
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::span<const float>> EmbeddingStore::find(std::string_view key) const {
  const auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return std::span<const float>(data_).subspan(it->second * dim_, dim_);
}

std::vector<double> EmbeddingStore::get(std::string_view key) const {
  const auto v = find(key);
  if (!v) throw Error(ErrorKind::missing_embedding, "no embedding for key '" + std::string(key) + "'");
  return {v->begin(), v->end()};
}

EmbeddingStore open_embedding_store(std::string_view bytes) {
  if (bytes.size() >= 4 && bytes.substr(0, 4) == kEmbMagic) return parse_emb1(bytes);
  const auto first = bytes.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return EmbeddingStore{};
  if (bytes[first] == '{') return parse_embedding_jsonl(bytes);
  throw Error(ErrorKind::bad_magic, "embedding file is neither EMB1 nor JSONL");
}

std::string write_emb1(const EmbeddingStore& store) {
  std::string out(kEmbMagic);
  append_u32_le(out, static_cast<std::uint32_t>(store.dim()));
  for (const auto& key : store.keys()) {
    append_u32_le(out, static_cast<std::uint32_t>(key.size()));
    out += key;
    const std::span<const float> v = *store.find(key);
    for (const float x : v) append_f32_le(out, x);
  }
  return out;
}

std::string write_embedding_jsonl(const EmbeddingStore& store) {
  std::string out;
  for (const auto& key : store.keys()) {
    nlohmann::ordered_json obj;
    obj["key"] = key;
    const auto v = *store.find(key);
    obj["vector"] = std::vector<float>(v.begin(), v.end());
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<double> hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  return hash_embed(tokenize(text), dim, seed);
}

std::vector<double> hash_embed(const TokenList& tokens, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorKind::invalid_argument, "hash_embed dimension must be >= 1");
  std::vector<double> sum(dim, 0.0);
  std::vector<double> tv(dim);
  for (const auto& token : tokens) {
    const std::uint64_t key = splitmix64(fnv1a64(token) ^ splitmix64(seed));
    // Box-Muller over counter-indexed draws gives an isotropic direction.
    double norm2 = 0.0;
    for (std::size_t k = 0; k < dim; k += 2) {
      const double u1 = unit_open(splitmix64(key + 2 * k));
      const double u2 = unit_open(splitmix64(key + 2 * k + 1));
      const double r = std::sqrt(-2.0 * std::log(u1));
      tv[k] = r * std::cos(2.0 * std::numbers::pi * u2);
      if (k + 1 < dim) tv[k + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
    }
    for (const double x : tv) norm2 += x * x;
    const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
    for (std::size_t k = 0; k < dim; ++k) sum[k] += tv[k] * inv;
  }
  double norm2 = 0.0;
  for (const double x : sum) norm2 += x * x;
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : sum) x *= inv;
  }
  return sum;
}

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_f32_le(std::string& out, float v) { append_u32_le(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t read_u32_le(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

float read_f32_le(std::string_view bytes, std::size_t offset) {
  return std::bit_cast<float>(read_u32_le(bytes, offset));
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace qfsum
