// Copyright 2026 The qadsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qad/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"
#include "qad/diagnostics.hpp"
#include "qad/trace_io.hpp"

namespace qad::manifest {
namespace {

using nlohmann::json;

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) throw Error("SHA-256 update failed");
  }

  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, digest, &len) != 1) throw Error("SHA-256 final failed");
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

void collect(const std::filesystem::path& root, const std::filesystem::path& dir,
             std::vector<OutputEntry>& out) {
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory()) {
      if (std::filesystem::exists(entry.path() / std::string(kManifestName))) continue;
      collect(root, entry.path(), out);
    } else if (entry.is_regular_file() && entry.path().filename() != std::string(kManifestName)) {
      out.push_back({std::filesystem::relative(entry.path(), root).generic_string(),
                     sha256_file(entry.path()), entry.file_size()});
    }
  }
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<OutputEntry> inventory(const std::filesystem::path& dir) {
  std::vector<OutputEntry> out;
  collect(dir, dir, out);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  json j;
  j["tool_version"] = m.tool_version;
  j["command"] = m.command;
  j["options"] = m.options;
  j["config_sha256"] = m.config_sha256;
  j["config_text"] = m.config_text;
  j["seed"] = m.seed;
  j["tolerances"] = m.tolerances;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  j["outputs"] = json::array();
  for (const auto& e : m.outputs) {
    j["outputs"].push_back({{"path", e.path}, {"sha256", e.sha256}, {"size", e.size}});
  }
  io::write_text(dir / std::string(kManifestName), j.dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  RunManifest m;
  try {
    const json j = json::parse(io::read_text(path));
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.options = j.at("options").get<std::map<std::string, std::string>>();
    m.config_sha256 = j.at("config_sha256").get<std::string>();
    m.config_text = j.at("config_text").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    m.started_utc = j.at("started_utc").get<std::string>();
    m.finished_utc = j.at("finished_utc").get<std::string>();
    for (const auto& e : j.at("outputs")) {
      m.outputs.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>(),
                           e.at("size").get<std::uintmax_t>()});
    }
  } catch (const json::exception& e) {
    throw InvalidInput(fmt::format("{}: malformed manifest ({})", path.string(), e.what()));
  }
  if (sha256_hex(m.config_text) != m.config_sha256) {
    throw InvalidInput(path.string() + ": config_text does not match config_sha256");
  }
  return m;
}

std::vector<std::string> verify(const std::filesystem::path& dir, const RunManifest& m) {
  std::vector<std::string> bad;
  for (const auto& e : m.outputs) {
    const auto p = dir / e.path;
    if (!std::filesystem::is_regular_file(p) || std::filesystem::file_size(p) != e.size ||
        sha256_file(p) != e.sha256) {
      bad.push_back(e.path);
    }
  }
  return bad;
}

}  // namespace qad::manifest
