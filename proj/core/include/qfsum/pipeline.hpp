#pragma once

// Answer assembly, evaluation, cross-validation and the training-window
// experiment driver.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qfsum/corpus.hpp"
#include "qfsum/qahead.hpp"
#include "qfsum/rouge.hpp"
#include "qfsum/vecspace.hpp"

namespace qfsum {

struct AnswerConfig {
  std::map<QuestionType, int> n_per_type{
      {QuestionType::summary, 6}, {QuestionType::factoid, 2}, {QuestionType::yesno, 2}, {QuestionType::list, 3}};

  int n_for(QuestionType type) const;
  void validate() const;
};

struct AnswerResult {
  std::string question_id;
  std::vector<SnippetRef> chosen;  // ascending list_position
  std::string answer_text;
};

// Top n by score (ties to the lower list position), emitted in list order.
// `scores` is aligned with `candidates`.
AnswerResult assemble_answer(const Question& question, std::span<const SnippetRef> candidates,
                             std::span<const double> scores, const AnswerConfig& config = {});

struct QuestionResult {
  std::string id;
  double f1 = 0.0;
  bool empty_answer = false;
  int fold = -1;
};

struct EvalReport {
  std::vector<QuestionResult> per_question;
  double mean_f1 = 0.0;
  std::vector<double> fold_means;
  std::vector<std::pair<std::string, std::string>> config;
};

double mean_of(std::span<const QuestionResult> results);

// ROUGE-SU4 F1 of each answer against its question's ideal answers.
// Predictions and gold must cover the same ids.
EvalReport evaluate_answers(std::span<const AnswerResult> predictions, std::span<const TrainingExample> gold,
                            const RougeConfig& rouge = {});

struct SetScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

SetScore document_f1(const std::set<std::string>& predicted, const std::set<std::string>& gold);

enum class SnippetMatch { char_overlap, exact };

// Character-overlap F1: snippets are located in their document (title, a
// newline, then text) and overlap is measured on the union of spans per
// document. Snippets whose text cannot be located count toward their own
// side's total only. Throws Error(not_found) for unknown documents.
SetScore snippet_f1(std::span<const SnippetRef> predicted, std::span<const SnippetRef> gold,
                    std::span<const Document> corpus, SnippetMatch match = SnippetMatch::char_overlap);

// Where pair embeddings come from. Store keys are "<question id>#<position>".
struct PairEmbeddings {
  const EmbeddingStore* store = nullptr;
  bool hash_fallback = true;
  std::size_t hash_dim = 64;
  std::uint64_t seed = 0;

  std::size_t dim() const;
  std::vector<double> lookup(const Question& question, const SnippetRef& snippet) const;
};

std::string pair_key(std::string_view question_id, int position);

// Head inputs for every snippet of an example.
std::vector<std::vector<double>> example_inputs(const TrainingExample& example, const PairEmbeddings& embeddings,
                                                bool normalize_position);

enum class FoldOrder { shuffled, chronological };

FoldOrder parse_fold_order(std::string_view name);
std::string_view to_string(FoldOrder order) noexcept;

struct CvConfig {
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  FoldOrder order = FoldOrder::shuffled;
  std::size_t label_k = 5;
  std::size_t threads = 1;
  RougeConfig rouge;
};

// Indices of each fold: one seeded shuffle (or file order), then contiguous
// blocks whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t folds, std::uint64_t seed,
                                                     FoldOrder order);

struct CvResult {
  EvalReport report;
  std::vector<AnswerResult> answers;  // example order
};

CvResult crossvalidate(std::span<const TrainingExample> examples, const CvConfig& cv, const TrainConfig& train,
                       const AnswerConfig& answer, const PairEmbeddings& embeddings);

struct WindowRow {
  double fraction = 0.0;
  std::size_t examples = 0;
  double mean_f1 = 0.0;
  EvalReport report;
};

std::vector<WindowRow> run_window_experiment(std::span<const TrainingExample> examples,
                                             std::span<const double> fractions, WindowMode mode,
                                             const CvConfig& cv, const TrainConfig& train,
                                             const AnswerConfig& answer, const PairEmbeddings& embeddings);

std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);
std::string window_to_json(std::span<const WindowRow> rows, WindowMode mode);
// Percentage column and F1 column, three decimals.
std::string window_to_table(std::span<const WindowRow> rows);

struct SubmissionEntry {
  std::string id;
  std::vector<std::string> documents;
  std::vector<SnippetRef> snippets;
  std::optional<std::string> ideal_answer;

  bool operator==(const SubmissionEntry&) const = default;
};

std::string emit_submission(std::span<const SubmissionEntry> entries);
std::vector<SubmissionEntry> parse_submission(std::string_view json);

}  // namespace qfsum
