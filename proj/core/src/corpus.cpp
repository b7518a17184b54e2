#include "qfsum/corpus.hpp"

#include <cmath>
#include <unordered_map>

#include "json.hpp"
#include "qfsum/error.hpp"
#include "qfsum/textproc.hpp"

namespace qfsum {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string where(const std::string& qid, std::string_view field) {
  std::string out = "question '" + qid + "'";
  if (!field.empty()) out += ", field '" + std::string(field) + "'";
  return out;
}

const json& require(const json& obj, const char* field, const std::string& qid) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw Error(ErrorKind::missing_field, where(qid, field));
  return *it;
}

std::string require_string(const json& obj, const char* field, const std::string& qid) {
  const json& v = require(obj, field, qid);
  if (!v.is_string()) {
    throw Error(ErrorKind::malformed_input, where(qid, field) + " must be a string");
  }
  return v.get<std::string>();
}

std::vector<std::string> string_list(const json& v, const char* field, const std::string& qid) {
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) {
    throw Error(ErrorKind::malformed_input, where(qid, field) + " must be a string or list");
  }
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) {
      throw Error(ErrorKind::malformed_input, where(qid, field) + " entries must be strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

TrainingExample parse_question(const json& q, std::size_t index) {
  if (!q.is_object()) {
    throw Error(ErrorKind::malformed_input, "questions[" + std::to_string(index) + "] is not an object");
  }
  TrainingExample ex;
  const std::string fallback_id = "#" + std::to_string(index);
  ex.question.id = require_string(q, "id", fallback_id);
  const std::string& qid = ex.question.id;
  if (qid.empty()) throw Error(ErrorKind::malformed_input, where(fallback_id, "id") + " is empty");

  ex.question.body = require_string(q, "body", qid);
  if (ex.question.body.empty()) throw Error(ErrorKind::malformed_input, where(qid, "body") + " is empty");

  const std::string type = require_string(q, "type", qid);
  try {
    ex.question.qtype = parse_question_type(type);
  } catch (const Error&) {
    throw Error(ErrorKind::unknown_question_type, where(qid, "type") + ": '" + type + "'");
  }

  ex.ideal_answers = string_list(require(q, "ideal_answer", qid), "ideal_answer", qid);
  if (ex.ideal_answers.empty()) {
    throw Error(ErrorKind::missing_field, where(qid, "ideal_answer") + " is an empty list");
  }

  const json& snippets = require(q, "snippets", qid);
  if (!snippets.is_array()) throw Error(ErrorKind::malformed_input, where(qid, "snippets") + " must be a list");
  for (const auto& s : snippets) {
    if (!s.is_object()) throw Error(ErrorKind::malformed_input, where(qid, "snippets") + " entries must be objects");
    SnippetRef ref;
    ref.document_id = require_string(s, "document", qid);
    ref.text = require_string(s, "text", qid);
    if (ref.text.empty()) throw Error(ErrorKind::malformed_input, where(qid, "snippets.text") + " is empty");
    ref.list_position = static_cast<int>(ex.snippets.size()) + 1;
    ex.snippets.push_back(std::move(ref));
  }

  if (const auto it = q.find("labels"); it != q.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorKind::malformed_input, where(qid, "labels") + " must be a list");
    std::vector<int> labels;
    for (const auto& l : *it) {
      if (!l.is_number_integer() || (l.get<int>() != 0 && l.get<int>() != 1)) {
        throw Error(ErrorKind::malformed_input, where(qid, "labels") + " entries must be 0 or 1");
      }
      labels.push_back(l.get<int>());
    }
    if (labels.size() != ex.snippets.size()) {
      throw Error(ErrorKind::malformed_input, where(qid, "labels") + " length differs from snippets");
    }
    ex.labels = std::move(labels);
  }
  if (const auto it = q.find("documents"); it != q.end() && !it->is_null()) {
    ex.documents = string_list(*it, "documents", qid);
  }
  return ex;
}

}  // namespace

QuestionType parse_question_type(std::string_view name) {
  if (name == "summary") return QuestionType::summary;
  if (name == "factoid") return QuestionType::factoid;
  if (name == "yesno") return QuestionType::yesno;
  if (name == "list") return QuestionType::list;
  throw Error(ErrorKind::unknown_question_type, "'" + std::string(name) + "'");
}

std::string_view to_string(QuestionType type) noexcept {
  switch (type) {
    case QuestionType::summary: return "summary";
    case QuestionType::factoid: return "factoid";
    case QuestionType::yesno: return "yesno";
    case QuestionType::list: return "list";
  }
  return "summary";
}

std::string normalize_snippet_text(std::string_view text) {
  return collapse_whitespace(casefold(text));
}

void FeedbackSet::add_document(std::string id) { document_ids_.insert(std::move(id)); }

void FeedbackSet::add_snippet(std::string document_id, std::string_view text) {
  snippet_keys_.emplace(std::move(document_id), normalize_snippet_text(text));
}

bool FeedbackSet::contains_document(std::string_view id) const {
  return document_ids_.find(id) != document_ids_.end();
}

bool FeedbackSet::contains_snippet(std::string_view document_id, std::string_view text) const {
  return snippet_keys_.count({std::string(document_id), normalize_snippet_text(text)}) > 0;
}

std::vector<TrainingExample> parse_training_set(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::malformed_input, std::string("training set: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorKind::malformed_input, "training set: top level must be an object");
  const auto it = root.find("questions");
  if (it == root.end()) throw Error(ErrorKind::missing_field, "training set: 'questions'");
  if (!it->is_array()) throw Error(ErrorKind::malformed_input, "training set: 'questions' must be a list");

  std::vector<TrainingExample> out;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < it->size(); ++i) {
    auto ex = parse_question((*it)[i], i);
    if (!seen.emplace(ex.question.id, i).second) {
      throw Error(ErrorKind::duplicate_id, where(ex.question.id, "id") + " appears more than once");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::string serialize_training_set(std::span<const TrainingExample> examples) {
  ordered_json questions = ordered_json::array();
  for (const auto& ex : examples) {
    ordered_json q;
    q["id"] = ex.question.id;
    q["body"] = ex.question.body;
    q["type"] = std::string(to_string(ex.question.qtype));
    q["ideal_answer"] = ex.ideal_answers;
    ordered_json snippets = ordered_json::array();
    for (const auto& s : ex.snippets) {
      ordered_json js;
      js["document"] = s.document_id;
      js["text"] = s.text;
      snippets.push_back(std::move(js));
    }
    q["snippets"] = std::move(snippets);
    if (ex.labels) q["labels"] = *ex.labels;
    if (!ex.documents.empty()) q["documents"] = ex.documents;
    questions.push_back(std::move(q));
  }
  ordered_json root;
  root["questions"] = std::move(questions);
  return root.dump(2) + "\n";
}

std::vector<Document> parse_corpus(std::string_view text) {
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const std::string at = "corpus line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::malformed_input, at + ": " + e.what());
    }
    if (!obj.is_object()) throw Error(ErrorKind::malformed_input, at + ": not an object");
    Document doc;
    for (auto [field, target] : {std::pair{"id", &doc.id}, std::pair{"title", &doc.title},
                                 std::pair{"text", &doc.text}}) {
      const auto it = obj.find(field);
      if (it == obj.end()) throw Error(ErrorKind::missing_field, at + ": '" + field + "'");
      if (!it->is_string()) throw Error(ErrorKind::malformed_input, at + ": '" + field + "' must be a string");
      *target = it->get<std::string>();
    }
    if (doc.id.empty()) throw Error(ErrorKind::malformed_input, at + ": empty id");
    if (const auto [it, inserted] = seen.emplace(doc.id, line_no); !inserted) {
      throw Error(ErrorKind::duplicate_id, at + ": id '" + doc.id + "' already defined on line " +
                                               std::to_string(it->second));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string serialize_corpus(std::span<const Document> docs) {
  std::string out;
  for (const auto& d : docs) {
    ordered_json obj;
    obj["id"] = d.id;
    obj["title"] = d.title;
    obj["text"] = d.text;
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

FeedbackSet parse_feedback(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::malformed_input, std::string("feedback: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorKind::malformed_input, "feedback: top level must be an object");
  FeedbackSet out;
  if (const auto it = root.find("documents"); it != root.end()) {
    if (!it->is_array()) throw Error(ErrorKind::malformed_input, "feedback: 'documents' must be a list");
    for (const auto& d : *it) {
      if (!d.is_string()) throw Error(ErrorKind::malformed_input, "feedback: document ids must be strings");
      out.add_document(d.get<std::string>());
    }
  }
  if (const auto it = root.find("snippets"); it != root.end()) {
    if (!it->is_array()) throw Error(ErrorKind::malformed_input, "feedback: 'snippets' must be a list");
    for (const auto& s : *it) {
      if (!s.is_object() || !s.contains("document") || !s.contains("text") ||
          !s["document"].is_string() || !s["text"].is_string()) {
        throw Error(ErrorKind::malformed_input, "feedback: snippets need string 'document' and 'text'");
      }
      out.add_snippet(s["document"].get<std::string>(), s["text"].get<std::string>());
    }
  }
  return out;
}

WindowMode parse_window_mode(std::string_view name) {
  if (name == "drop_first" || name == "drop-first") return WindowMode::drop_first;
  if (name == "drop_last" || name == "drop-last") return WindowMode::drop_last;
  throw Error(ErrorKind::invalid_argument, "unknown window mode '" + std::string(name) + "'");
}

std::string_view to_string(WindowMode mode) noexcept {
  return mode == WindowMode::drop_first ? "drop_first" : "drop_last";
}

std::vector<TrainingExample> window_training(std::span<const TrainingExample> examples,
                                             WindowMode mode, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "window fraction must lie in [0, 1]");
  }
  const std::size_t n = examples.size();
  // The epsilon absorbs representation error such as 0.3 * 10 = 2.9999...
  auto removed = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  if (removed > n) removed = n;
  if (mode == WindowMode::drop_first) {
    return {examples.begin() + static_cast<std::ptrdiff_t>(removed), examples.end()};
  }
  return {examples.begin(), examples.end() - static_cast<std::ptrdiff_t>(removed)};
}

}  // namespace qfsum
