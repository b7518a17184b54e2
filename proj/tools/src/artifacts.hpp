#pragma once

// File plumbing for the command-line tools: whole-file reads, input
// digests, and output sets that become visible all at once.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qfsum::cli {

// Throws Error(not_found) when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

// 16 lowercase hex digits of FNV-1a 64.
std::string digest_hex(std::string_view bytes);

class OutputSet {
 public:
  void add(std::string name, std::string content);
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

  // Writes every file as "<name>.tmp" in `dir`, then renames them into
  // place. If any write fails, temporaries are removed and nothing is
  // renamed.
  void commit(const std::filesystem::path& dir) const;

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct InputDigest {
  std::string role;
  std::string path;
  std::string digest;
};

// Manifest JSON: command, seed, the config echo, input digests and output
// names. No timestamps or host details, so identical runs give identical
// manifests.
std::string make_manifest(std::string_view command, std::uint64_t seed, std::string_view config_json,
                          const std::vector<InputDigest>& inputs, const std::vector<std::string>& outputs);

}  // namespace qfsum::cli
