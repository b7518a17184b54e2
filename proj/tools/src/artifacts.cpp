#include "artifacts.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "qfsum/error.hpp"
#include "qfsum/vecspace.hpp"

namespace qfsum::cli {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::not_found, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string digest_hex(std::string_view bytes) {
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return out;
}

void OutputSet::add(std::string name, std::string content) {
  for (auto& [n, c] : files_) {
    if (n == name) {
      c = std::move(content);
      return;
    }
  }
  files_.emplace_back(std::move(name), std::move(content));
}

void OutputSet::commit(const fs::path& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::not_found, "cannot create output directory '" + dir.string() + "': " + ec.message());

  std::vector<fs::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [name, content] : files_) {
    const fs::path tmp = dir / (name + ".tmp");
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      cleanup();
      throw Error(ErrorKind::not_found, "cannot write '" + tmp.string() + "'");
    }
  }
  for (std::size_t i = 0; i < files_.size(); ++i) {
    fs::rename(temps[i], dir / files_[i].first, ec);
    if (ec) {
      cleanup();
      throw Error(ErrorKind::not_found, "cannot rename '" + temps[i].string() + "': " + ec.message());
    }
  }
}

std::string make_manifest(std::string_view command, std::uint64_t seed, std::string_view config_json,
                          const std::vector<InputDigest>& inputs, const std::vector<std::string>& outputs) {
  nlohmann::ordered_json j;
  j["command"] = std::string(command);
  j["seed"] = seed;
  j["config"] = nlohmann::ordered_json::parse(config_json);
  nlohmann::ordered_json in = nlohmann::ordered_json::array();
  for (const auto& d : inputs) {
    nlohmann::ordered_json e;
    e["role"] = d.role;
    e["path"] = d.path;
    e["fnv1a64"] = d.digest;
    in.push_back(std::move(e));
  }
  j["inputs"] = std::move(in);
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

}  // namespace qfsum::cli
