#pragma once

// Settings shared by every command: a JSON document, optionally overridden
// by command-line flags. A run manifest's "config" object is itself a valid
// config, so any run can be repeated from its manifest.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qfsum/corpus.hpp"
#include "qfsum/pipeline.hpp"
#include "qfsum/qahead.hpp"
#include "qfsum/retrieval.hpp"

namespace qfsum::cli {

inline constexpr std::string_view kConfigEnvVar = "QFSUM_CONFIG";

enum class Embedder { hash, store };

Embedder parse_embedder(std::string_view name);
std::string_view to_string(Embedder embedder) noexcept;

struct Paths {
  std::string training;
  std::string corpus;
  std::string embeddings;           // pair embeddings for the head
  std::string sentence_embeddings;  // question and sentence vectors for the dense reranker
  std::string feedback;
  std::string model;
  std::string submission;
  std::string output_dir = ".";
};

struct Limits {
  std::size_t k_docs = 10;
  std::size_t per_doc = 3;
  std::size_t snippet_limit = 10;
  std::size_t label_k = 5;
};

struct RunConfig {
  Paths paths;
  SimilarityBackend similarity = SimilarityBackend::tfidf;
  SortingMode sorting = SortingMode::global;
  Embedder embedder = Embedder::hash;
  std::size_t hash_dim = 64;
  TrainConfig train;
  AnswerConfig answer;
  std::uint64_t seed = 0;
  std::size_t folds = 10;
  FoldOrder fold_order = FoldOrder::shuffled;
  std::size_t threads = 1;
  Limits limits;
  WindowMode window_mode = WindowMode::drop_first;
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  // When > 0, a generated question set replaces paths.training.
  std::size_t synthetic = 0;
  double synthetic_inverted = 0.0;

  // Numeric ranges and enum consistency; throws Error(invalid_argument).
  void validate() const;
};

// Throws Error with the offending field path ("train.epochs", ...).
RunConfig parse_run_config(std::string_view json);

// Every field except paths.output_dir, in a fixed key order.
std::string run_config_to_json(const RunConfig& config);

// Parses "0.1,0.2,0.5".
std::vector<double> parse_fraction_list(std::string_view text);

}  // namespace qfsum::cli
