#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "run_config.hpp"

namespace qfsum::cli {

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"validate", "label",    "train", "retrieve", "rerank",
                                              "answer",   "evaluate", "xval",  "window",   "rouge"};
  return names;
}

struct RougeArgs {
  std::string candidate;
  std::vector<std::string> references;
};

// Runs one command, writes its artifacts and manifest into
// config.paths.output_dir and a short summary to `out`. Throws Error on bad
// input; nothing is written in that case.
void run_command(std::string_view command, const RunConfig& config, const RougeArgs& rouge_args,
                 std::ostream& out);

}  // namespace qfsum::cli
