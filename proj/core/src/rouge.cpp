#include "qfsum/rouge.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "qfsum/error.hpp"

namespace qfsum {
namespace {

void check(const RougeConfig& config) {
  if (config.max_skip < 0) throw Error(ErrorKind::invalid_argument, "max_skip must be >= 0");
  if (!(config.beta > 0.0)) throw Error(ErrorKind::invalid_argument, "beta must be > 0");
}

// Units are packed into 64 bits over a shared interning table: the low 32
// bits hold the second token id + 1 (0 for unigrams).
using PackedCounts = std::unordered_map<std::uint64_t, std::uint32_t>;

class Interner {
 public:
  std::uint32_t id(const std::string& token) {
    return ids_.try_emplace(token, static_cast<std::uint32_t>(ids_.size())).first->second;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
};

PackedCounts packed_units(const TokenList& tokens, const RougeConfig& config, Interner& interner) {
  std::vector<std::uint64_t> ids(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) ids[i] = interner.id(tokens[i]);

  PackedCounts counts;
  const std::size_t window = static_cast<std::size_t>(config.max_skip) + 1;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (config.include_unigrams) ++counts[ids[i] << 32];
    const std::size_t last = std::min(ids.size() - 1, i + window);
    for (std::size_t j = i + 1; j <= last; ++j) ++counts[(ids[i] << 32) | (ids[j] + 1)];
  }
  return counts;
}

}  // namespace

double f_measure(double precision, double recall, double beta) {
  if (precision + recall <= 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * precision * recall / (b2 * precision + recall);
}

std::size_t su_unit_count(std::size_t length, const RougeConfig& config) {
  const std::size_t window = static_cast<std::size_t>(config.max_skip) + 1;
  std::size_t total = config.include_unigrams ? length : 0;
  for (std::size_t i = 0; i < length; ++i) total += std::min(window, length - 1 - i);
  return total;
}

SuUnitCounts su_units(const TokenList& tokens, const RougeConfig& config) {
  check(config);
  SuUnitCounts counts;
  const std::size_t window = static_cast<std::size_t>(config.max_skip) + 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (config.include_unigrams) ++counts[SuUnit{tokens[i], {}}];
    for (std::size_t j = i + 1; j < tokens.size() && j - i <= window; ++j) {
      ++counts[SuUnit{tokens[i], tokens[j]}];
    }
  }
  return counts;
}

RougeScore rouge_su4(const TokenList& candidate, const TokenList& reference,
                     const RougeConfig& config) {
  check(config);
  Interner interner;
  const PackedCounts cand = packed_units(candidate, config, interner);
  const PackedCounts ref = packed_units(reference, config, interner);

  RougeScore score;
  score.candidate_units = su_unit_count(candidate.size(), config);
  score.reference_units = su_unit_count(reference.size(), config);
  const PackedCounts& small = cand.size() <= ref.size() ? cand : ref;
  const PackedCounts& large = cand.size() <= ref.size() ? ref : cand;
  for (const auto& [unit, count] : small) {
    if (const auto it = large.find(unit); it != large.end()) {
      score.match_count += std::min(count, it->second);
    }
  }
  if (score.candidate_units > 0) {
    score.precision = static_cast<double>(score.match_count) / static_cast<double>(score.candidate_units);
  }
  if (score.reference_units > 0) {
    score.recall = static_cast<double>(score.match_count) / static_cast<double>(score.reference_units);
  }
  score.f1 = f_measure(score.precision, score.recall, config.beta);
  return score;
}

double rouge_su4_multi(const TokenList& candidate, std::span<const TokenList> references,
                       const RougeConfig& config) {
  if (references.empty()) throw Error(ErrorKind::invalid_argument, "rouge_su4_multi needs at least one reference");
  double best = 0.0;
  for (const auto& ref : references) best = std::max(best, rouge_su4(candidate, ref, config).f1);
  return best;
}

}  // namespace qfsum
