#include "qfsum/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "qfsum/error.hpp"
#include "qfsum/textproc.hpp"

namespace qfsum {
namespace {

using nlohmann::ordered_json;

struct Interval {
  std::size_t begin;
  std::size_t end;
};

std::vector<Interval> merge(std::vector<Interval> spans) {
  std::sort(spans.begin(), spans.end(), [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
  std::vector<Interval> out;
  for (const auto& s : spans) {
    if (!out.empty() && s.begin <= out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

std::size_t total_length(const std::vector<Interval>& merged) {
  std::size_t n = 0;
  for (const auto& s : merged) n += s.end - s.begin;
  return n;
}

std::size_t overlap_length(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  std::size_t n = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const std::size_t lo = std::max(a[i].begin, b[j].begin);
    const std::size_t hi = std::min(a[i].end, b[j].end);
    if (lo < hi) n += hi - lo;
    if (a[i].end < b[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  return n;
}

SetScore from_counts(double overlap, double predicted, double gold) {
  if (predicted == 0.0 && gold == 0.0) return {1.0, 1.0, 1.0};
  SetScore s;
  if (predicted > 0.0) s.precision = overlap / predicted;
  if (gold > 0.0) s.recall = overlap / gold;
  s.f1 = f_measure(s.precision, s.recall);
  return s;
}

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

ordered_json config_echo(const EvalReport& report) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : report.config) j[k] = v;
  return j;
}

ordered_json report_json(const EvalReport& report) {
  ordered_json j;
  j["config"] = config_echo(report);
  j["mean_rouge_su4_f1"] = report.mean_f1;
  j["questions"] = report.per_question.size();
  j["fold_means"] = report.fold_means;
  ordered_json per = ordered_json::array();
  for (const auto& q : report.per_question) {
    ordered_json e;
    e["id"] = q.id;
    e["f1"] = q.f1;
    if (q.fold >= 0) e["fold"] = q.fold;
    if (q.empty_answer) e["empty_answer"] = true;
    per.push_back(std::move(e));
  }
  j["per_question"] = std::move(per);
  return j;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled by exactly one worker.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

int AnswerConfig::n_for(QuestionType type) const {
  const auto it = n_per_type.find(type);
  if (it == n_per_type.end()) {
    throw Error(ErrorKind::missing_field, "no answer length for type '" + std::string(to_string(type)) + "'");
  }
  return it->second;
}

void AnswerConfig::validate() const {
  for (const auto type : {QuestionType::summary, QuestionType::factoid, QuestionType::yesno, QuestionType::list}) {
    if (n_for(type) < 1) {
      throw Error(ErrorKind::invalid_argument, "answer length for '" + std::string(to_string(type)) + "' must be >= 1");
    }
  }
}

AnswerResult assemble_answer(const Question& question, std::span<const SnippetRef> candidates,
                             std::span<const double> scores, const AnswerConfig& config) {
  if (candidates.size() != scores.size()) {
    throw Error(ErrorKind::dimension_mismatch, "scores are not aligned with candidates");
  }
  AnswerResult result;
  result.question_id = question.id;
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a].list_position < candidates[b].list_position;
  });
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.n_for(question.qtype)), order.size());
  order.resize(n);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].list_position < candidates[b].list_position;
  });
  for (const std::size_t i : order) {
    result.chosen.push_back(candidates[i]);
    if (!result.answer_text.empty()) result.answer_text.push_back(' ');
    result.answer_text += candidates[i].text;
  }
  return result;
}

double mean_of(std::span<const QuestionResult> results) {
  if (results.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : results) total += r.f1;
  return total / static_cast<double>(results.size());
}

EvalReport evaluate_answers(std::span<const AnswerResult> predictions, std::span<const TrainingExample> gold,
                            const RougeConfig& rouge) {
  std::unordered_map<std::string, const TrainingExample*> by_id;
  for (const auto& ex : gold) by_id.emplace(ex.question.id, &ex);
  if (predictions.size() != gold.size()) {
    throw Error(ErrorKind::invalid_argument, std::to_string(predictions.size()) + " predictions for " +
                                                 std::to_string(gold.size()) + " gold questions");
  }
  EvalReport report;
  std::set<std::string> seen;
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.question_id);
    if (it == by_id.end()) throw Error(ErrorKind::not_found, "no gold question '" + p.question_id + "'");
    if (!seen.insert(p.question_id).second) {
      throw Error(ErrorKind::duplicate_id, "prediction for '" + p.question_id + "' appears twice");
    }
    std::vector<TokenList> refs;
    for (const auto& a : it->second->ideal_answers) refs.push_back(tokenize(a));
    QuestionResult r;
    r.id = p.question_id;
    r.empty_answer = p.chosen.empty() && p.answer_text.empty();
    r.f1 = refs.empty() ? 0.0 : rouge_su4_multi(tokenize(p.answer_text), refs, rouge);
    report.per_question.push_back(std::move(r));
  }
  report.mean_f1 = mean_of(report.per_question);
  return report;
}

SetScore document_f1(const std::set<std::string>& predicted, const std::set<std::string>& gold) {
  std::size_t common = 0;
  for (const auto& id : predicted) common += gold.count(id);
  return from_counts(static_cast<double>(common), static_cast<double>(predicted.size()),
                     static_cast<double>(gold.size()));
}

SetScore snippet_f1(std::span<const SnippetRef> predicted, std::span<const SnippetRef> gold,
                    std::span<const Document> corpus, SnippetMatch match) {
  std::unordered_map<std::string, const Document*> docs;
  for (const auto& d : corpus) docs.emplace(d.id, &d);
  auto lookup = [&](const SnippetRef& s) -> const Document& {
    const auto it = docs.find(s.document_id);
    if (it == docs.end()) throw Error(ErrorKind::not_found, "snippet references unknown document '" + s.document_id + "'");
    return *it->second;
  };

  if (match == SnippetMatch::exact) {
    std::set<std::pair<std::string, std::string>> p;
    std::set<std::pair<std::string, std::string>> g;
    for (const auto& s : predicted) {
      lookup(s);
      p.emplace(s.document_id, normalize_snippet_text(s.text));
    }
    for (const auto& s : gold) {
      lookup(s);
      g.emplace(s.document_id, normalize_snippet_text(s.text));
    }
    std::size_t common = 0;
    for (const auto& k : p) common += g.count(k);
    return from_counts(static_cast<double>(common), static_cast<double>(p.size()), static_cast<double>(g.size()));
  }

  struct Side {
    std::map<std::string, std::vector<Interval>> spans;
    std::size_t unlocated = 0;
  };
  auto collect = [&](std::span<const SnippetRef> snippets) {
    Side side;
    for (const auto& s : snippets) {
      const Document& doc = lookup(s);
      if (s.text.empty()) continue;
      const std::string full = doc.title + "\n" + doc.text;
      const auto at = full.find(s.text);
      if (at == std::string::npos) {
        side.unlocated += s.text.size();
      } else {
        side.spans[s.document_id].push_back({at, at + s.text.size()});
      }
    }
    return side;
  };
  Side p = collect(predicted);
  Side g = collect(gold);
  double overlap = 0.0;
  double p_total = static_cast<double>(p.unlocated);
  double g_total = static_cast<double>(g.unlocated);
  std::map<std::string, std::vector<Interval>> g_merged;
  for (auto& [doc, spans] : g.spans) {
    g_merged[doc] = merge(spans);
    g_total += static_cast<double>(total_length(g_merged[doc]));
  }
  for (auto& [doc, spans] : p.spans) {
    const auto merged = merge(spans);
    p_total += static_cast<double>(total_length(merged));
    if (const auto it = g_merged.find(doc); it != g_merged.end()) {
      overlap += static_cast<double>(overlap_length(merged, it->second));
    }
  }
  return from_counts(overlap, p_total, g_total);
}

std::size_t PairEmbeddings::dim() const {
  if (store != nullptr && store->dim() > 0) return store->dim();
  return hash_dim;
}

std::string pair_key(std::string_view question_id, int position) {
  return std::string(question_id) + "#" + std::to_string(position);
}

std::vector<double> PairEmbeddings::lookup(const Question& question, const SnippetRef& snippet) const {
  if (store != nullptr) {
    if (const auto v = store->find(pair_key(question.id, snippet.list_position))) return {v->begin(), v->end()};
  }
  if (hash_fallback) return hash_embed(snippet.text, dim(), seed);
  throw Error(ErrorKind::missing_embedding,
              "no pair embedding for key '" + pair_key(question.id, snippet.list_position) + "'");
}

std::vector<std::vector<double>> example_inputs(const TrainingExample& example, const PairEmbeddings& embeddings,
                                                bool normalize_position) {
  std::vector<std::vector<double>> inputs;
  inputs.reserve(example.snippets.size());
  const double scale =
      normalize_position && !example.snippets.empty() ? 1.0 / static_cast<double>(example.snippets.size()) : 1.0;
  for (const auto& s : example.snippets) {
    inputs.push_back(build_feature(embeddings.lookup(example.question, s), s.list_position, scale));
  }
  return inputs;
}

FoldOrder parse_fold_order(std::string_view name) {
  if (name == "shuffled") return FoldOrder::shuffled;
  if (name == "chronological") return FoldOrder::chronological;
  throw Error(ErrorKind::invalid_argument, "unknown fold order '" + std::string(name) + "'");
}

std::string_view to_string(FoldOrder order) noexcept {
  return order == FoldOrder::shuffled ? "shuffled" : "chronological";
}

std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t folds, std::uint64_t seed,
                                                     FoldOrder order) {
  if (folds < 2) throw Error(ErrorKind::invalid_argument, "cross-validation needs at least 2 folds");
  if (n < folds) {
    throw Error(ErrorKind::invalid_argument, "cross-validation needs at least as many examples (" +
                                                 std::to_string(n) + ") as folds (" + std::to_string(folds) + ")");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (order == FoldOrder::shuffled) {
    SeededRng rng(seed);
    rng.shuffle(idx);
  }
  std::vector<std::vector<std::size_t>> out(folds);
  const std::size_t base = n / folds;
  const std::size_t extra = n % folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    out[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos), idx.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return out;
}

CvResult crossvalidate(std::span<const TrainingExample> examples, const CvConfig& cv, const TrainConfig& train_config,
                       const AnswerConfig& answer, const PairEmbeddings& embeddings) {
  train_config.validate();
  answer.validate();
  const auto folds = fold_partition(examples.size(), cv.folds, cv.seed, cv.order);
  const std::size_t n = examples.size();

  // Inputs and labels depend only on the example, so compute them once.
  std::vector<std::vector<std::vector<double>>> inputs(n);
  std::vector<std::vector<int>> labels(n);
  parallel_for(n, cv.threads, [&](std::size_t i) {
    const auto& ex = examples[i];
    inputs[i] = example_inputs(ex, embeddings, train_config.normalize_position);
    if (ex.snippets.empty()) return;
    labels[i] = ex.labels ? *ex.labels : make_labels(ex, cv.label_k, cv.rouge);
  });

  std::vector<int> fold_of(n, -1);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (const std::size_t i : folds[f]) fold_of[i] = static_cast<int>(f);
  }

  std::vector<AnswerResult> answers(n);
  std::vector<QuestionResult> results(n);
  parallel_for(folds.size(), cv.threads, [&](std::size_t f) {
    std::vector<LabeledInstance> data;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == static_cast<int>(f)) continue;
      for (std::size_t s = 0; s < inputs[i].size(); ++s) data.push_back({inputs[i][s], labels[i][s]});
    }
    TrainConfig fold_config = train_config;
    fold_config.seed = splitmix64(train_config.seed + f);
    const HeadParams params = train(data, fold_config);
    for (const std::size_t i : folds[f]) {
      const auto& ex = examples[i];
      const auto scores = score_candidates(params, inputs[i]);
      answers[i] = assemble_answer(ex.question, ex.snippets, scores, answer);
      std::vector<TokenList> refs;
      for (const auto& a : ex.ideal_answers) refs.push_back(tokenize(a));
      QuestionResult r;
      r.id = ex.question.id;
      r.fold = static_cast<int>(f);
      r.empty_answer = answers[i].chosen.empty();
      r.f1 = refs.empty() ? 0.0 : rouge_su4_multi(tokenize(answers[i].answer_text), refs, cv.rouge);
      results[i] = std::move(r);
    }
  });

  CvResult out;
  out.answers = std::move(answers);
  out.report.per_question = std::move(results);
  out.report.mean_f1 = mean_of(out.report.per_question);
  for (const auto& fold : folds) {
    std::vector<QuestionResult> part;
    for (const std::size_t i : fold) part.push_back(out.report.per_question[i]);
    out.report.fold_means.push_back(mean_of(part));
  }
  out.report.config = {
      {"folds", std::to_string(cv.folds)},
      {"fold_order", std::string(to_string(cv.order))},
      {"cv_seed", std::to_string(cv.seed)},
      {"label_k", std::to_string(cv.label_k)},
      {"dropout", fmt(train_config.dropout, 6)},
      {"epochs", std::to_string(train_config.epochs)},
      {"learning_rate", fmt(train_config.learning_rate, 6)},
      {"batch_size", std::to_string(train_config.batch_size)},
      {"hidden", std::to_string(train_config.hidden)},
      {"train_seed", std::to_string(train_config.seed)},
      {"normalize_position", train_config.normalize_position ? "true" : "false"},
      {"embedding_dim", std::to_string(embeddings.dim())},
      {"examples", std::to_string(n)},
  };
  return out;
}

std::vector<WindowRow> run_window_experiment(std::span<const TrainingExample> examples,
                                             std::span<const double> fractions, WindowMode mode,
                                             const CvConfig& cv, const TrainConfig& train,
                                             const AnswerConfig& answer, const PairEmbeddings& embeddings) {
  for (const double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorKind::invalid_argument, "window fractions must lie in [0, 1]");
  }
  std::vector<WindowRow> rows;
  for (const double f : fractions) {
    const auto kept = window_training(examples, mode, f);
    WindowRow row;
    row.fraction = f;
    row.examples = kept.size();
    row.report = crossvalidate(kept, cv, train, answer, embeddings).report;
    row.report.config.emplace_back("window_mode", std::string(to_string(mode)));
    row.report.config.emplace_back("window_fraction", fmt(f, 6));
    row.mean_f1 = row.report.mean_f1;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string report_to_json(const EvalReport& report) { return report_json(report).dump(2) + "\n"; }

std::string report_to_table(const EvalReport& report) {
  std::string out = "Fold | Questions | ROUGE-SU4 F1\n-----+-----------+-------------\n";
  std::vector<std::size_t> counts(report.fold_means.size(), 0);
  for (const auto& q : report.per_question) {
    if (q.fold >= 0 && static_cast<std::size_t>(q.fold) < counts.size()) ++counts[q.fold];
  }
  char line[128];
  for (std::size_t f = 0; f < report.fold_means.size(); ++f) {
    std::snprintf(line, sizeof line, "%4zu | %9zu | %12.3f\n", f + 1, counts[f], report.fold_means[f]);
    out += line;
  }
  std::snprintf(line, sizeof line, "mean | %9zu | %12.3f\n", report.per_question.size(), report.mean_f1);
  out += line;
  return out;
}

std::string window_to_json(std::span<const WindowRow> rows, WindowMode mode) {
  ordered_json j;
  j["mode"] = std::string(to_string(mode));
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json e;
    e["fraction"] = r.fraction;
    e["examples"] = r.examples;
    e["mean_rouge_su4_f1"] = r.mean_f1;
    e["report"] = report_json(r.report);
    arr.push_back(std::move(e));
  }
  j["rows"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string window_to_table(std::span<const WindowRow> rows) {
  std::string out = "Percentage removed | ROUGE-SU4 F1\n-------------------+-------------\n";
  char line[128];
  for (const auto& r : rows) {
    const std::string pct = fmt(r.fraction * 100.0, 0) + "%";
    std::snprintf(line, sizeof line, "%18s | %12.3f\n", pct.c_str(), r.mean_f1);
    out += line;
  }
  return out;
}

std::string emit_submission(std::span<const SubmissionEntry> entries) {
  ordered_json questions = ordered_json::array();
  for (const auto& e : entries) {
    ordered_json q;
    q["id"] = e.id;
    q["documents"] = e.documents;
    ordered_json snippets = ordered_json::array();
    for (const auto& s : e.snippets) {
      ordered_json js;
      js["document"] = s.document_id;
      js["text"] = s.text;
      snippets.push_back(std::move(js));
    }
    q["snippets"] = std::move(snippets);
    if (e.ideal_answer) q["ideal_answer"] = *e.ideal_answer;
    questions.push_back(std::move(q));
  }
  ordered_json root;
  root["questions"] = std::move(questions);
  return root.dump(2) + "\n";
}

std::vector<SubmissionEntry> parse_submission(std::string_view text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::malformed_input, std::string("submission: ") + e.what());
  }
  if (!root.is_object() || !root.contains("questions") || !root["questions"].is_array()) {
    throw Error(ErrorKind::missing_field, "submission: 'questions'");
  }
  std::vector<SubmissionEntry> out;
  try {
    for (const auto& q : root["questions"]) {
      SubmissionEntry e;
      e.id = q.at("id").get<std::string>();
      if (q.contains("documents")) e.documents = q["documents"].get<std::vector<std::string>>();
      if (q.contains("snippets")) {
        for (const auto& s : q["snippets"]) {
          e.snippets.push_back(SnippetRef{s.at("document").get<std::string>(), s.at("text").get<std::string>(),
                                          static_cast<int>(e.snippets.size()) + 1});
        }
      }
      if (q.contains("ideal_answer")) {
        const auto& a = q["ideal_answer"];
        e.ideal_answer = a.is_array() ? (a.empty() ? std::string() : a[0].get<std::string>()) : a.get<std::string>();
      }
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::malformed_input, std::string("submission: ") + e.what());
  }
  return out;
}

}  // namespace qfsum
