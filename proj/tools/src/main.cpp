// qfsum: question-focused summarization runs from the command line.
//
// Exit status: 0 on success, 1 for data or config errors, 2 for usage
// errors.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "artifacts.hpp"
#include "commands.hpp"
#include "qfsum/error.hpp"
#include "run_config.hpp"

namespace {

using namespace qfsum;
using namespace qfsum::cli;

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::optional<std::string> training, corpus, embeddings, sentence_embeddings, feedback, model, submission, out;
  std::optional<std::string> similarity, sorting, embedder, fold_order, mode, fractions;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads, folds, hash_dim, k_docs, per_doc, snippet_limit, label_k, synthetic;
  std::optional<std::size_t> batch_size, hidden;
  std::optional<int> epochs;
  std::optional<double> dropout, learning_rate, inverted;
  bool normalize_position = false;
};

template <typename T, typename U>
void apply(const std::optional<T>& flag, U& field) {
  if (flag) field = *flag;
}

void apply_overrides(const Overrides& o, RunConfig& c) {
  apply(o.training, c.paths.training);
  apply(o.corpus, c.paths.corpus);
  apply(o.embeddings, c.paths.embeddings);
  apply(o.sentence_embeddings, c.paths.sentence_embeddings);
  apply(o.feedback, c.paths.feedback);
  apply(o.model, c.paths.model);
  apply(o.submission, c.paths.submission);
  apply(o.out, c.paths.output_dir);
  if (o.similarity) c.similarity = parse_similarity_backend(*o.similarity);
  if (o.sorting) c.sorting = parse_sorting_mode(*o.sorting);
  if (o.embedder) c.embedder = parse_embedder(*o.embedder);
  if (o.fold_order) c.fold_order = parse_fold_order(*o.fold_order);
  if (o.mode) c.window_mode = parse_window_mode(*o.mode);
  if (o.fractions) c.fractions = parse_fraction_list(*o.fractions);
  apply(o.seed, c.seed);
  apply(o.threads, c.threads);
  apply(o.folds, c.folds);
  apply(o.hash_dim, c.hash_dim);
  apply(o.k_docs, c.limits.k_docs);
  apply(o.per_doc, c.limits.per_doc);
  apply(o.snippet_limit, c.limits.snippet_limit);
  apply(o.label_k, c.limits.label_k);
  apply(o.synthetic, c.synthetic);
  apply(o.inverted, c.synthetic_inverted);
  apply(o.batch_size, c.train.batch_size);
  apply(o.hidden, c.train.hidden);
  apply(o.epochs, c.train.epochs);
  apply(o.dropout, c.train.dropout);
  apply(o.learning_rate, c.train.learning_rate);
  if (o.normalize_position) c.train.normalize_position = true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question-focused extractive summarization: retrieval, reranking, answer scoring and evaluation"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::optional<std::string> config_path;
  Overrides o;
  RougeArgs rouge_args;

  app.add_option("--config", config_path, "JSON config file (default: $QFSUM_CONFIG); a run manifest also works");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--training", o.training, "Training or question set (JSON)");
  app.add_option("--corpus", o.corpus, "Document corpus (JSONL)");
  app.add_option("--embeddings", o.embeddings, "Pair embeddings for the scoring head (EMB1 or JSONL)");
  app.add_option("--sentence-embeddings", o.sentence_embeddings, "Question and sentence embeddings for dense reranking");
  app.add_option("--feedback", o.feedback, "Feedback documents and snippets to exclude (JSON)");
  app.add_option("--model", o.model, "Trained head model file");
  app.add_option("--submission", o.submission, "Submission JSON to evaluate");
  app.add_option("--similarity", o.similarity, "Reranking similarity")->check(CLI::IsMember({"tfidf", "dense", "sbert"}));
  app.add_option("--sorting", o.sorting, "Reranking order")->check(CLI::IsMember({"local", "global"}));
  app.add_option("--embedder", o.embedder, "hash: built-in hash embedder; store: exported embedding files")
      ->check(CLI::IsMember({"hash", "store"}));
  app.add_option("--hash-dim", o.hash_dim, "Hash embedder dimension");
  app.add_option("--seed", o.seed, "Seed for training, folds and hashing");
  app.add_option("--threads", o.threads, "Worker threads for cross-validation");
  app.add_option("--folds", o.folds, "Cross-validation folds");
  app.add_option("--fold-order", o.fold_order, "Fold assignment")->check(CLI::IsMember({"shuffled", "chronological"}));
  app.add_option("--epochs", o.epochs, "Training epochs");
  app.add_option("--dropout", o.dropout, "Hidden-layer dropout rate");
  app.add_option("--learning-rate", o.learning_rate, "Adam learning rate");
  app.add_option("--batch-size", o.batch_size, "Minibatch size");
  app.add_option("--hidden", o.hidden, "Hidden units");
  app.add_flag("--normalize-position", o.normalize_position, "Divide the position feature by the list length");
  app.add_option("--k-docs", o.k_docs, "Documents kept per question");
  app.add_option("--per-doc", o.per_doc, "Sentences kept per document in local sorting");
  app.add_option("--snippet-limit", o.snippet_limit, "Snippets kept per question");
  app.add_option("--label-k", o.label_k, "Positive labels per question");
  app.add_option("--synthetic", o.synthetic, "Use N generated questions instead of --training");
  app.add_option("--inverted", o.inverted, "Fraction of generated questions (from the front) with flipped labels");

  std::vector<CLI::App*> subs;
  for (const auto& name : command_names()) subs.push_back(app.add_subcommand(name));
  subs[0]->description("Check inputs and report counts");
  subs[1]->description("Label the top snippets of each question by ROUGE-SU4");
  subs[2]->description("Train the scoring head");
  subs[3]->description("Retrieve documents for each question");
  subs[4]->description("Retrieve documents and rerank their sentences");
  subs[5]->description("Score candidate snippets and assemble answers");
  subs[6]->description("Score a submission against the ideal answers");
  subs[7]->description("Cross-validate the head and report ROUGE-SU4 F1");
  subs[8]->description("Cross-validate on training windows that drop early or late questions");
  subs[9]->description("ROUGE-SU4 of one candidate against references");
  subs[8]->add_option("--mode", o.mode, "drop-first or drop-last")
      ->check(CLI::IsMember({"drop-first", "drop_first", "drop-last", "drop_last"}));
  subs[8]->add_option("--fractions", o.fractions, "Comma-separated fractions, e.g. 0.1,0.2,0.5");
  subs[9]->add_option("--candidate", rouge_args.candidate, "Candidate text")->required();
  subs[9]->add_option("--reference", rouge_args.references, "Reference text (repeatable)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig config;
    if (!config_path) {
      if (const char* env = std::getenv(std::string(kConfigEnvVar).c_str()); env != nullptr && *env != '\0') {
        config_path = env;
      }
    }
    if (config_path) config = parse_run_config(read_file(*config_path));
    apply_overrides(o, config);
    run_command(command, config, rouge_args, std::cout);
  } catch (const Error& e) {
    std::cerr << "qfsum " << command << ": " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "qfsum " << command << ": " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
