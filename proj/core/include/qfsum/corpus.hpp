#pragma once

// Data model and ingestion for question sets, document corpora and
// feedback files.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qfsum {

enum class QuestionType { summary, factoid, yesno, list };

// Throws Error(unknown_question_type) for anything but the four names.
QuestionType parse_question_type(std::string_view name);
std::string_view to_string(QuestionType type) noexcept;

struct Question {
  std::string id;
  std::string body;
  QuestionType qtype = QuestionType::summary;
};

struct Document {
  std::string id;
  std::string title;
  std::string text;
};

struct SnippetRef {
  std::string document_id;
  std::string text;
  int list_position = 1;  // 1-based position within the question's snippet list

  bool operator==(const SnippetRef&) const = default;
};

struct TrainingExample {
  Question question;
  std::vector<SnippetRef> snippets;
  std::vector<std::string> ideal_answers;
  // Optional per-snippet {0,1} labels; when absent they are derived from
  // the ideal answers.
  std::optional<std::vector<int>> labels;
  // Optional gold document ids.
  std::vector<std::string> documents;
};

// Casefold + whitespace collapse + trim. Used as the snippet identity.
std::string normalize_snippet_text(std::string_view text);

class FeedbackSet {
 public:
  using SnippetKey = std::pair<std::string, std::string>;

  void add_document(std::string id);
  void add_snippet(std::string document_id, std::string_view text);

  bool contains_document(std::string_view id) const;
  bool contains_snippet(std::string_view document_id, std::string_view text) const;

  const std::set<std::string, std::less<>>& document_ids() const { return document_ids_; }
  const std::set<SnippetKey>& snippet_keys() const { return snippet_keys_; }

 private:
  std::set<std::string, std::less<>> document_ids_;
  std::set<SnippetKey> snippet_keys_;
};

std::vector<TrainingExample> parse_training_set(std::string_view json);
std::string serialize_training_set(std::span<const TrainingExample> examples);

std::vector<Document> parse_corpus(std::string_view jsonl);
// One {"id", "title", "text"} object per line.
std::string serialize_corpus(std::span<const Document> docs);
FeedbackSet parse_feedback(std::string_view json);

enum class WindowMode { drop_first, drop_last };

WindowMode parse_window_mode(std::string_view name);
std::string_view to_string(WindowMode mode) noexcept;

// Removes floor(fraction * n) examples from the front or the back.
std::vector<TrainingExample> window_training(std::span<const TrainingExample> examples,
                                             WindowMode mode, double fraction);

}  // namespace qfsum
