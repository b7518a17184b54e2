// qfsum-synth: writes a generated question set and matching corpus.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "artifacts.hpp"
#include "qfsum/corpus.hpp"
#include "qfsum/error.hpp"
#include "qfsum/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic question set and corpus"};
  qfsum::SyntheticSpec spec;
  std::string out = ".";
  std::string prefix = "synthetic";
  app.add_option("--questions", spec.questions, "Number of questions")->check(CLI::PositiveNumber);
  app.add_option("--relevant", spec.relevant, "Relevant snippets per question")->check(CLI::PositiveNumber);
  app.add_option("--distractors", spec.distractors, "Distractor snippets per question");
  app.add_option("--inverted", spec.inverted_fraction, "Fraction of questions with flipped labels")
      ->check(CLI::Range(0.0, 1.0));
  app.add_flag("!--no-labels", spec.with_labels, "Omit explicit labels");
  app.add_option("--seed", spec.seed, "Generator seed");
  app.add_option("--out", out, "Output directory");
  app.add_option("--prefix", prefix, "File name prefix");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto examples = qfsum::make_synthetic_dataset(spec);
    qfsum::cli::OutputSet files;
    files.add(prefix + "_train.json", qfsum::serialize_training_set(examples));
    files.add(prefix + "_corpus.jsonl", qfsum::serialize_corpus(qfsum::make_synthetic_corpus(examples)));
    files.commit(out);
    std::cout << examples.size() << " questions written to " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "qfsum-synth: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
