#include "run_config.hpp"

#include <cmath>
#include <set>
#include <type_traits>

#include "json.hpp"
#include "qfsum/error.hpp"

namespace qfsum::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::malformed_input, "config field '" + path + "': " + what);
}

std::string join_path(const std::string& prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

// Reads the members of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* member(std::string_view key) {
    known_.insert(std::string(key));
    const auto it = object_.find(std::string(key));
    return it == object_.end() || it->is_null() ? nullptr : &*it;
  }

  void read(std::string_view key, std::string& out) {
    if (const json* v = member(key)) {
      if (!v->is_string()) field_error(join_path(path_, key), "expected a string");
      out = v->get<std::string>();
    }
  }

  template <typename T>
    requires std::is_unsigned_v<T>
  void read(std::string_view key, T& out) {
    if (const json* v = member(key)) {
      if (!v->is_number_unsigned()) field_error(join_path(path_, key), "expected a non-negative integer");
      out = v->get<T>();
    }
  }

  void read(std::string_view key, int& out) {
    if (const json* v = member(key)) {
      if (!v->is_number_integer()) field_error(join_path(path_, key), "expected an integer");
      out = v->get<int>();
    }
  }

  void read(std::string_view key, double& out) {
    if (const json* v = member(key)) {
      if (!v->is_number()) field_error(join_path(path_, key), "expected a number");
      out = v->get<double>();
    }
  }

  void read(std::string_view key, bool& out) {
    if (const json* v = member(key)) {
      if (!v->is_boolean()) field_error(join_path(path_, key), "expected true or false");
      out = v->get<bool>();
    }
  }

  template <typename Parse, typename T>
  void read_enum(std::string_view key, T& out, Parse parse) {
    std::string name;
    read(key, name);
    if (name.empty()) return;
    try {
      out = parse(name);
    } catch (const Error& e) {
      field_error(join_path(path_, key), e.what());
    }
  }

  std::string child_path(std::string_view key) const { return join_path(path_, key); }

  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (known_.count(key) == 0) field_error(join_path(path_, key), "unknown field");
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> known_;
};

}  // namespace

Embedder parse_embedder(std::string_view name) {
  if (name == "hash") return Embedder::hash;
  if (name == "store") return Embedder::store;
  throw Error(ErrorKind::invalid_argument, "unknown embedder '" + std::string(name) + "'");
}

std::string_view to_string(Embedder embedder) noexcept { return embedder == Embedder::hash ? "hash" : "store"; }

void RunConfig::validate() const {
  auto positive = [](std::size_t v, const char* field) {
    if (v < 1) throw Error(ErrorKind::invalid_argument, std::string("config field '") + field + "': must be >= 1");
  };
  positive(hash_dim, "hash_dim");
  positive(folds, "folds");
  if (folds < 2) throw Error(ErrorKind::invalid_argument, "config field 'folds': must be >= 2");
  positive(threads, "threads");
  positive(limits.k_docs, "limits.k_docs");
  positive(limits.per_doc, "limits.per_doc");
  positive(limits.snippet_limit, "limits.snippet_limit");
  positive(limits.label_k, "limits.label_k");
  try {
    train.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::invalid_argument, std::string("config section 'train': ") + e.what());
  }
  try {
    answer.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::invalid_argument, std::string("config section 'answer': ") + e.what());
  }
  for (const double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorKind::invalid_argument, "config field 'window.fractions': values must lie in [0, 1]");
  }
  if (!(synthetic_inverted >= 0.0 && synthetic_inverted <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "config field 'synthetic.inverted_fraction': must lie in [0, 1]");
  }
}

RunConfig parse_run_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::malformed_input, std::string("config is not valid JSON: ") + e.what());
  }
  // A manifest carries the config it ran with.
  if (root.is_object() && root.contains("command") && root.contains("config")) root = root["config"];

  RunConfig c;
  ObjectReader r(root, "");
  if (const json* p = r.member("paths")) {
    ObjectReader pr(*p, "paths");
    pr.read("training", c.paths.training);
    pr.read("corpus", c.paths.corpus);
    pr.read("embeddings", c.paths.embeddings);
    pr.read("sentence_embeddings", c.paths.sentence_embeddings);
    pr.read("feedback", c.paths.feedback);
    pr.read("model", c.paths.model);
    pr.read("submission", c.paths.submission);
    pr.read("output_dir", c.paths.output_dir);
    pr.finish();
  }
  r.read_enum("similarity", c.similarity, parse_similarity_backend);
  r.read_enum("sorting", c.sorting, parse_sorting_mode);
  r.read_enum("embedder", c.embedder, parse_embedder);
  r.read("hash_dim", c.hash_dim);
  r.read("seed", c.seed);
  r.read("folds", c.folds);
  r.read_enum("fold_order", c.fold_order, parse_fold_order);
  r.read("threads", c.threads);
  if (const json* t = r.member("train")) {
    ObjectReader tr(*t, "train");
    tr.read("dropout", c.train.dropout);
    tr.read("epochs", c.train.epochs);
    tr.read("learning_rate", c.train.learning_rate);
    tr.read("batch_size", c.train.batch_size);
    tr.read("hidden", c.train.hidden);
    tr.read("normalize_position", c.train.normalize_position);
    tr.finish();
  }
  if (const json* a = r.member("answer")) {
    ObjectReader ar(*a, "answer");
    for (const QuestionType type :
         {QuestionType::summary, QuestionType::factoid, QuestionType::yesno, QuestionType::list}) {
      int n = c.answer.n_per_type[type];
      ar.read(to_string(type), n);
      c.answer.n_per_type[type] = n;
    }
    ar.finish();
  }
  if (const json* l = r.member("limits")) {
    ObjectReader lr(*l, "limits");
    lr.read("k_docs", c.limits.k_docs);
    lr.read("per_doc", c.limits.per_doc);
    lr.read("snippet_limit", c.limits.snippet_limit);
    lr.read("label_k", c.limits.label_k);
    lr.finish();
  }
  if (const json* w = r.member("window")) {
    ObjectReader wr(*w, "window");
    wr.read_enum("mode", c.window_mode, parse_window_mode);
    if (const json* f = wr.member("fractions")) {
      if (!f->is_array()) field_error("window.fractions", "expected an array of numbers");
      c.fractions.clear();
      for (const auto& x : *f) {
        if (!x.is_number()) field_error("window.fractions", "expected an array of numbers");
        c.fractions.push_back(x.get<double>());
      }
    }
    wr.finish();
  }
  if (const json* s = r.member("synthetic")) {
    ObjectReader sr(*s, "synthetic");
    sr.read("questions", c.synthetic);
    sr.read("inverted_fraction", c.synthetic_inverted);
    sr.finish();
  }
  r.finish();
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  ordered_json j;
  ordered_json paths;
  paths["training"] = c.paths.training;
  paths["corpus"] = c.paths.corpus;
  paths["embeddings"] = c.paths.embeddings;
  paths["sentence_embeddings"] = c.paths.sentence_embeddings;
  paths["feedback"] = c.paths.feedback;
  paths["model"] = c.paths.model;
  paths["submission"] = c.paths.submission;
  j["paths"] = std::move(paths);
  j["similarity"] = std::string(to_string(c.similarity));
  j["sorting"] = std::string(to_string(c.sorting));
  j["embedder"] = std::string(to_string(c.embedder));
  j["hash_dim"] = c.hash_dim;
  j["seed"] = c.seed;
  j["folds"] = c.folds;
  j["fold_order"] = std::string(to_string(c.fold_order));
  j["threads"] = c.threads;
  ordered_json train;
  train["dropout"] = c.train.dropout;
  train["epochs"] = c.train.epochs;
  train["learning_rate"] = c.train.learning_rate;
  train["batch_size"] = c.train.batch_size;
  train["hidden"] = c.train.hidden;
  train["normalize_position"] = c.train.normalize_position;
  j["train"] = std::move(train);
  ordered_json answer;
  for (const auto& [type, n] : c.answer.n_per_type) answer[std::string(to_string(type))] = n;
  j["answer"] = std::move(answer);
  ordered_json limits;
  limits["k_docs"] = c.limits.k_docs;
  limits["per_doc"] = c.limits.per_doc;
  limits["snippet_limit"] = c.limits.snippet_limit;
  limits["label_k"] = c.limits.label_k;
  j["limits"] = std::move(limits);
  ordered_json window;
  window["mode"] = std::string(to_string(c.window_mode));
  window["fractions"] = c.fractions;
  j["window"] = std::move(window);
  ordered_json synthetic;
  synthetic["questions"] = c.synthetic;
  synthetic["inverted_fraction"] = c.synthetic_inverted;
  j["synthetic"] = std::move(synthetic);
  return j.dump(2);
}

std::vector<double> parse_fraction_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    std::string item(text.substr(start, end - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size() || !std::isfinite(v)) {
      throw Error(ErrorKind::invalid_argument, "bad fraction '" + item + "' in list '" + std::string(text) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace qfsum::cli
