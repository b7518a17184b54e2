#pragma once

// Deterministic synthetic question sets for exercising the pipeline
// without external data or encoders.
//
// Every question owns a topic word. Its snippets are `relevant` sentences
// about the topic drawn from a shared "relevant" vocabulary plus
// `distractors` drawn from a disjoint filler vocabulary, shuffled together.
// The ideal answer is the relevant sentences in list order, so picking them
// scores well under ROUGE and picking distractors scores zero. Explicit labels mark the relevant snippets; for the first
// `inverted_fraction` of questions the labels are flipped, while the ideal
// answers stay correct.

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "qfsum/corpus.hpp"

namespace qfsum {

struct SyntheticSpec {
  std::size_t questions = 200;
  std::size_t relevant = 5;
  // Overrides `relevant` for the listed question types.
  std::map<QuestionType, std::size_t> relevant_per_type;
  std::size_t distractors = 15;
  double inverted_fraction = 0.0;
  bool with_labels = true;
  std::uint64_t seed = 7;
};

std::vector<TrainingExample> make_synthetic_dataset(const SyntheticSpec& spec);

// One document per synthetic question (relevant and distractor sentences
// interleaved), for exercising retrieval and reranking.
std::vector<Document> make_synthetic_corpus(const std::vector<TrainingExample>& examples);

}  // namespace qfsum
