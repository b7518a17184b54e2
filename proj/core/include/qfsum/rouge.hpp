#pragma once

// ROUGE-SU skip-bigram + unigram overlap.
//
// A skip-bigram is an ordered token pair (t_i, t_j), i < j, with at most
// max_skip tokens between them (j - i - 1 <= max_skip). Counts are clipped
// multiset intersections, as in the reference toolkit.

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>

#include "qfsum/textproc.hpp"

namespace qfsum {

struct RougeConfig {
  int max_skip = 4;
  bool include_unigrams = true;
  double beta = 1.0;
};

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t match_count = 0;
  std::size_t candidate_units = 0;
  std::size_t reference_units = 0;
};

// A unigram unit has an empty `second`; tokens are never empty so the two
// kinds never collide.
struct SuUnit {
  std::string first;
  std::string second;

  bool is_unigram() const { return second.empty(); }
  auto operator<=>(const SuUnit&) const = default;
};

using SuUnitCounts = std::map<SuUnit, std::size_t>;

SuUnitCounts su_units(const TokenList& tokens, const RougeConfig& config = {});

// Number of units su_units would produce, without materializing them.
std::size_t su_unit_count(std::size_t length, const RougeConfig& config = {});

RougeScore rouge_su4(const TokenList& candidate, const TokenList& reference,
                     const RougeConfig& config = {});

// Max F1 over references. Throws Error(invalid_argument) on an empty list.
double rouge_su4_multi(const TokenList& candidate, std::span<const TokenList> references,
                       const RougeConfig& config = {});

// F-measure from precision/recall (0 when both are 0).
double f_measure(double precision, double recall, double beta = 1.0);

}  // namespace qfsum
