#include "commands.hpp"

#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "artifacts.hpp"
#include "json.hpp"
#include "qfsum/error.hpp"
#include "qfsum/synthetic.hpp"
#include "qfsum/vecspace.hpp"

namespace qfsum::cli {
namespace {

using nlohmann::ordered_json;

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Loads inputs on demand and remembers what was read for the manifest.
class Inputs {
 public:
  explicit Inputs(const RunConfig& config) : config_(config) {}

  const std::vector<TrainingExample>& training() {
    if (training_) return *training_;
    if (config_.synthetic > 0) {
      SyntheticSpec spec;
      spec.questions = config_.synthetic;
      spec.inverted_fraction = config_.synthetic_inverted;
      training_ = make_synthetic_dataset(spec);
      const std::string name = "synthetic:" + std::to_string(config_.synthetic) + ":" +
                               fixed3(config_.synthetic_inverted);
      digests_.push_back({"training", name, digest_hex(serialize_training_set(*training_))});
    } else {
      training_ = parse_training_set(read("training", require(config_.paths.training, "paths.training", "--training")));
    }
    return *training_;
  }

  const std::vector<Document>& corpus() {
    if (!corpus_) corpus_ = parse_corpus(read("corpus", require(config_.paths.corpus, "paths.corpus", "--corpus")));
    return *corpus_;
  }

  bool has_corpus() const { return !config_.paths.corpus.empty(); }

  const FeedbackSet& feedback() {
    if (!feedback_) {
      feedback_ = config_.paths.feedback.empty() ? FeedbackSet{} : parse_feedback(read("feedback", config_.paths.feedback));
    }
    return *feedback_;
  }

  PairEmbeddings pair_embeddings() {
    PairEmbeddings e;
    e.hash_dim = config_.hash_dim;
    e.seed = config_.seed;
    if (config_.embedder == Embedder::store) {
      if (!pair_store_) {
        pair_store_ = std::make_unique<EmbeddingStore>(open_embedding_store(
            read("embeddings", require(config_.paths.embeddings, "paths.embeddings", "--embeddings"))));
      }
      e.store = pair_store_.get();
      e.hash_fallback = false;
    }
    return e;
  }

  DenseEmbeddings dense_embeddings() {
    DenseEmbeddings e;
    e.hash_dim = config_.hash_dim;
    e.seed = config_.seed;
    e.hash_fallback = true;
    if (config_.embedder == Embedder::store && config_.similarity == SimilarityBackend::dense) {
      if (!sentence_store_) {
        sentence_store_ = std::make_unique<EmbeddingStore>(open_embedding_store(read(
            "sentence_embeddings",
            require(config_.paths.sentence_embeddings, "paths.sentence_embeddings", "--sentence-embeddings"))));
      }
      e.store = sentence_store_.get();
      e.hash_fallback = false;
    }
    return e;
  }

  HeadModel model() {
    return read_head_model(read("model", require(config_.paths.model, "paths.model", "--model")));
  }

  std::vector<SubmissionEntry> submission() {
    return parse_submission(read("submission", require(config_.paths.submission, "paths.submission", "--submission")));
  }

  const std::vector<InputDigest>& digests() const { return digests_; }

 private:
  static const std::string& require(const std::string& path, const char* field, const char* flag) {
    if (path.empty()) {
      throw Error(ErrorKind::missing_field, std::string("config field '") + field + "' (or " + flag + ") is required");
    }
    return path;
  }

  std::string read(const char* role, const std::string& path) {
    std::string bytes = read_file(path);
    digests_.push_back({role, path, digest_hex(bytes)});
    return bytes;
  }

  const RunConfig& config_;
  std::optional<std::vector<TrainingExample>> training_;
  std::optional<std::vector<Document>> corpus_;
  std::optional<FeedbackSet> feedback_;
  std::unique_ptr<EmbeddingStore> pair_store_;
  std::unique_ptr<EmbeddingStore> sentence_store_;
  std::vector<InputDigest> digests_;
};

TrainConfig train_config(const RunConfig& config) {
  TrainConfig t = config.train;
  t.seed = config.seed;
  return t;
}

CvConfig cv_config(const RunConfig& config) {
  CvConfig cv;
  cv.folds = config.folds;
  cv.seed = config.seed;
  cv.order = config.fold_order;
  cv.label_k = config.limits.label_k;
  cv.threads = config.threads;
  return cv;
}

std::vector<int> labels_for(const TrainingExample& ex, const RunConfig& config) {
  if (ex.labels) return *ex.labels;
  return make_labels(ex, config.limits.label_k);
}

std::vector<std::string> document_ids_of(const std::vector<SnippetRef>& snippets) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& s : snippets) {
    if (seen.insert(s.document_id).second) ids.push_back(s.document_id);
  }
  return ids;
}

struct RetrievalResult {
  RankedDocuments documents;
  RankedSnippets snippets;
};

// Document retrieval, feedback filtering, sentence scoring and reranking
// for one question.
RetrievalResult retrieve_and_rerank(const DocumentRetriever& retriever, const Question& question,
                                    const RunConfig& config, const FeedbackSet& feedback,
                                    const DenseEmbeddings& dense, bool with_snippets) {
  RetrievalResult r;
  const std::size_t wanted = config.limits.k_docs + feedback.document_ids().size();
  r.documents = dedup_documents(retriever.retrieve(question, wanted), feedback, config.limits.k_docs);
  if (!with_snippets || r.documents.empty()) return r;
  std::vector<Document> docs;
  for (const auto& d : r.documents) docs.push_back(*retriever.find(d.document_id));
  auto scored = score_similarity(config.similarity, question, candidate_sentences(docs), dense);
  const auto ranked = rerank(config.sorting, scored, config.limits.per_doc);
  r.snippets = dedup_and_take(ranked, feedback, config.limits.snippet_limit);
  return r;
}

class Run {
 public:
  Run(std::string_view command, const RunConfig& config, std::ostream& out)
      : command_(command), config_(config), inputs_(config), out_(out) {}

  Inputs& inputs() { return inputs_; }
  const RunConfig& config() const { return config_; }
  std::ostream& out() { return out_; }
  void add(std::string name, std::string content) { outputs_.add(std::move(name), std::move(content)); }

  void commit() {
    std::vector<std::string> names;
    for (const auto& [name, content] : outputs_.files()) names.push_back(name);
    outputs_.add("manifest.json",
                 make_manifest(command_, config_.seed, run_config_to_json(config_), inputs_.digests(), names));
    outputs_.commit(config_.paths.output_dir);
    for (const auto& name : names) out_ << "wrote " << (std::filesystem::path(config_.paths.output_dir) / name).string() << "\n";
  }

 private:
  std::string command_;
  const RunConfig& config_;
  Inputs inputs_;
  std::ostream& out_;
  OutputSet outputs_;
};

void cmd_validate(Run& run) {
  auto& in = run.inputs();
  const auto& examples = in.training();
  ordered_json j;
  j["questions"] = examples.size();
  std::size_t snippets = 0;
  std::map<std::string, std::size_t> by_type;
  for (const auto& ex : examples) {
    snippets += ex.snippets.size();
    ++by_type[std::string(to_string(ex.question.qtype))];
  }
  j["snippets"] = snippets;
  j["question_types"] = by_type;
  if (in.has_corpus()) j["corpus_documents"] = in.corpus().size();
  if (!run.config().paths.feedback.empty()) {
    j["feedback_documents"] = in.feedback().document_ids().size();
    j["feedback_snippets"] = in.feedback().snippet_keys().size();
  }
  if (run.config().embedder == Embedder::store) {
    const auto emb = in.pair_embeddings();
    for (const auto& ex : examples) {
      for (const auto& s : ex.snippets) emb.lookup(ex.question, s);  // throws on a missing key
    }
    j["embedding_dim"] = emb.dim();
  }
  if (!run.config().paths.model.empty()) {
    const auto model = in.model();
    if (run.config().embedder == Embedder::store && model.params.embedding_dim() != in.pair_embeddings().dim()) {
      throw Error(ErrorKind::dimension_mismatch, "model expects embeddings of dimension " +
                                                     std::to_string(model.params.embedding_dim()));
    }
    j["model_hidden"] = model.params.hidden;
  }
  run.add("validation.json", j.dump(2) + "\n");
  run.out() << examples.size() << " questions, " << snippets << " snippets: ok\n";
}

void cmd_label(Run& run) {
  std::vector<TrainingExample> examples = run.inputs().training();
  std::size_t positives = 0;
  for (auto& ex : examples) {
    ex.labels = make_labels(ex, run.config().limits.label_k);
    for (const int l : *ex.labels) positives += static_cast<std::size_t>(l);
  }
  run.add("labeled.json", serialize_training_set(examples));
  run.out() << examples.size() << " questions labeled, " << positives << " positive snippets\n";
}

void cmd_train(Run& run) {
  auto& in = run.inputs();
  const auto& examples = in.training();
  const auto emb = in.pair_embeddings();
  std::vector<LabeledInstance> data;
  for (const auto& ex : examples) {
    if (ex.snippets.empty()) continue;
    const auto inputs = example_inputs(ex, emb, run.config().train.normalize_position);
    const auto labels = labels_for(ex, run.config());
    for (std::size_t i = 0; i < inputs.size(); ++i) data.push_back({inputs[i], labels[i]});
  }
  const TrainConfig tc = train_config(run.config());
  const HeadParams params = train(data, tc);
  const double final_loss = loss(params, data);
  run.add("model.qhd", write_head_model(HeadModel{params, tc}));
  ordered_json j;
  j["instances"] = data.size();
  j["embedding_dim"] = params.embedding_dim();
  j["training_loss"] = final_loss;
  run.add("train.json", j.dump(2) + "\n");
  run.out() << "trained on " << data.size() << " instances, loss " << fixed3(final_loss) << "\n";
}

void cmd_retrieve(Run& run, bool with_snippets) {
  auto& in = run.inputs();
  const auto& examples = in.training();
  const DocumentRetriever retriever(in.corpus());
  const auto& feedback = in.feedback();
  const auto dense = in.dense_embeddings();
  std::vector<SubmissionEntry> entries;
  for (const auto& ex : examples) {
    const auto r = retrieve_and_rerank(retriever, ex.question, run.config(), feedback, dense, with_snippets);
    SubmissionEntry e;
    e.id = ex.question.id;
    for (const auto& d : r.documents) e.documents.push_back(d.document_id);
    e.snippets = to_snippet_list(r.snippets);
    entries.push_back(std::move(e));
  }
  run.add(with_snippets ? "snippets.json" : "documents.json", emit_submission(entries));
  run.out() << entries.size() << " questions " << (with_snippets ? "reranked" : "retrieved") << "\n";
}

void cmd_answer(Run& run) {
  auto& in = run.inputs();
  const auto& examples = in.training();
  const HeadModel model = in.model();
  const auto emb = in.pair_embeddings();
  if (emb.dim() != model.params.embedding_dim()) {
    throw Error(ErrorKind::dimension_mismatch, "model expects embeddings of dimension " +
                                                   std::to_string(model.params.embedding_dim()) + ", got " +
                                                   std::to_string(emb.dim()));
  }
  std::optional<DocumentRetriever> retriever;
  if (in.has_corpus()) retriever.emplace(in.corpus());
  const auto& feedback = in.feedback();
  const auto dense = in.dense_embeddings();

  std::vector<SubmissionEntry> entries;
  for (const auto& ex : examples) {
    TrainingExample candidates;
    candidates.question = ex.question;
    SubmissionEntry e;
    e.id = ex.question.id;
    if (retriever) {
      const auto r = retrieve_and_rerank(*retriever, ex.question, run.config(), feedback, dense, true);
      candidates.snippets = to_snippet_list(r.snippets);
      for (const auto& d : r.documents) e.documents.push_back(d.document_id);
    } else {
      candidates.snippets = ex.snippets;
      e.documents = document_ids_of(ex.snippets);
    }
    const auto scores =
        score_candidates(model.params, example_inputs(candidates, emb, model.config.normalize_position));
    const auto answer = assemble_answer(ex.question, candidates.snippets, scores, run.config().answer);
    e.snippets = candidates.snippets;
    e.ideal_answer = answer.answer_text;
    entries.push_back(std::move(e));
  }
  run.add("submission.json", emit_submission(entries));
  run.out() << entries.size() << " questions answered\n";
}

void cmd_evaluate(Run& run) {
  auto& in = run.inputs();
  const auto& gold = in.training();
  const auto entries = in.submission();
  std::vector<AnswerResult> predictions;
  for (const auto& e : entries) {
    AnswerResult a;
    a.question_id = e.id;
    a.chosen = e.snippets;
    a.answer_text = e.ideal_answer.value_or("");
    predictions.push_back(std::move(a));
  }
  EvalReport report = evaluate_answers(predictions, gold);

  std::map<std::string, const TrainingExample*> by_id;
  for (const auto& ex : gold) by_id.emplace(ex.question.id, &ex);
  double doc_sum = 0.0;
  double snip_sum = 0.0;
  std::size_t doc_n = 0;
  std::size_t snip_n = 0;
  for (const auto& e : entries) {
    const TrainingExample& ex = *by_id.at(e.id);
    if (!ex.documents.empty()) {
      doc_sum += document_f1({e.documents.begin(), e.documents.end()}, {ex.documents.begin(), ex.documents.end()}).f1;
      ++doc_n;
    }
    if (in.has_corpus()) {
      snip_sum += snippet_f1(e.snippets, ex.snippets, in.corpus()).f1;
      ++snip_n;
    }
  }
  if (doc_n > 0) report.config.emplace_back("mean_document_f1", fixed3(doc_sum / static_cast<double>(doc_n)));
  if (snip_n > 0) report.config.emplace_back("mean_snippet_f1", fixed3(snip_sum / static_cast<double>(snip_n)));

  run.add("report.json", report_to_json(report));
  run.add("report.txt", report_to_table(report));
  run.out() << "mean ROUGE-SU4 F1 " << fixed3(report.mean_f1) << " over " << report.per_question.size()
            << " questions\n";
}

std::vector<SubmissionEntry> submission_from(const std::vector<TrainingExample>& examples,
                                             const std::vector<AnswerResult>& answers) {
  std::vector<SubmissionEntry> entries;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    SubmissionEntry e;
    e.id = examples[i].question.id;
    e.documents = document_ids_of(answers[i].chosen);
    e.snippets = answers[i].chosen;
    e.ideal_answer = answers[i].answer_text;
    entries.push_back(std::move(e));
  }
  return entries;
}

void cmd_xval(Run& run) {
  auto& in = run.inputs();
  const auto& examples = in.training();
  const auto result =
      crossvalidate(examples, cv_config(run.config()), train_config(run.config()), run.config().answer,
                    in.pair_embeddings());
  run.add("report.json", report_to_json(result.report));
  run.add("report.txt", report_to_table(result.report));
  run.add("submission.json", emit_submission(submission_from(examples, result.answers)));
  run.out() << run.config().folds << "-fold mean ROUGE-SU4 F1 " << fixed3(result.report.mean_f1) << "\n";
}

void cmd_window(Run& run) {
  auto& in = run.inputs();
  const auto& examples = in.training();
  const auto rows = run_window_experiment(examples, run.config().fractions, run.config().window_mode,
                                          cv_config(run.config()), train_config(run.config()),
                                          run.config().answer, in.pair_embeddings());
  const std::string table = window_to_table(rows);
  run.add("window.json", window_to_json(rows, run.config().window_mode));
  run.add("window.txt", table);
  run.out() << table;
}

void cmd_rouge(Run& run, const RougeArgs& args) {
  if (args.references.empty()) throw Error(ErrorKind::missing_field, "at least one --reference is required");
  const TokenList candidate = tokenize(args.candidate);
  std::vector<TokenList> refs;
  ordered_json per_ref = ordered_json::array();
  for (const auto& r : args.references) {
    refs.push_back(tokenize(r));
    const auto s = rouge_su4(candidate, refs.back());
    ordered_json e;
    e["precision"] = s.precision;
    e["recall"] = s.recall;
    e["f1"] = s.f1;
    e["matches"] = s.match_count;
    e["candidate_units"] = s.candidate_units;
    e["reference_units"] = s.reference_units;
    per_ref.push_back(std::move(e));
  }
  const double best = rouge_su4_multi(candidate, refs);
  ordered_json j;
  j["candidate"] = args.candidate;
  j["references"] = std::move(per_ref);
  j["f1"] = best;
  run.add("rouge.json", j.dump(2) + "\n");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f\n", best);
  run.out() << buf;
}

}  // namespace

void run_command(std::string_view command, const RunConfig& config, const RougeArgs& rouge_args, std::ostream& out) {
  config.validate();
  Run run(command, config, out);
  if (command == "validate") {
    cmd_validate(run);
  } else if (command == "label") {
    cmd_label(run);
  } else if (command == "train") {
    cmd_train(run);
  } else if (command == "retrieve") {
    cmd_retrieve(run, false);
  } else if (command == "rerank") {
    cmd_retrieve(run, true);
  } else if (command == "answer") {
    cmd_answer(run);
  } else if (command == "evaluate") {
    cmd_evaluate(run);
  } else if (command == "xval") {
    cmd_xval(run);
  } else if (command == "window") {
    cmd_window(run);
  } else if (command == "rouge") {
    cmd_rouge(run, rouge_args);
  } else {
    throw Error(ErrorKind::invalid_argument, "unknown command '" + std::string(command) + "'");
  }
  run.commit();
}

}  // namespace qfsum::cli
