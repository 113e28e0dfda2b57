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

#pragma once

// Run manifests: what was run, with which configuration, and the SHA-256 of
// every file it wrote.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qad::manifest {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kManifestName = "manifest.json";

struct OutputEntry {
  std::string path;  // relative to the manifest directory, '/' separated
  std::string sha256;
  std::uintmax_t size = 0;
};

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string command;
  std::map<std::string, std::string> options;  // command-line options that shape outputs
  std::string config_sha256;
  std::string config_text;  // exact bytes of the configuration used
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  std::string started_utc;
  std::string finished_utc;
  std::vector<OutputEntry> outputs;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Current time as ISO 8601 UTC.
std::string utc_now();

/// Every regular file under `dir` except manifest files, skipping any
/// subdirectory that carries its own manifest. Sorted by path.
std::vector<OutputEntry> inventory(const std::filesystem::path& dir);

void write_manifest(const std::filesystem::path& dir, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

/// Paths whose hash or size differs from the manifest, or that are missing.
std::vector<std::string> verify(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace qad::manifest
