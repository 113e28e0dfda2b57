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

// Command pipelines behind the qadsim executable. Each command writes its
// data files, a report.json and a manifest.json into one output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qad::pipe {

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;     // overrides output.seed
  std::optional<std::size_t> points;     // overrides the command's primary grid size
  std::optional<std::filesystem::path> s11_input;  // saw-response: extract from this file
};

/// A computed quantity compared against a reference value.
struct Check {
  enum class Mode { Relative, Absolute, UpperBound };
  std::string name;
  double reference = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;
  Mode mode = Mode::Relative;
  bool pass = false;
};

Check make_check(std::string name, double reference, double computed, double tolerance, Check::Mode mode);

struct CommandResult {
  /// 0 success, 3 a reproduce-all check failed, 4 numerical failure.
  int exit_code = 0;
  std::vector<std::string> summary;  // human-readable lines
  std::vector<Check> checks;
  std::string error;  // set when a numerical failure stopped the pipeline
};

/// saw-response, coupling-map, chevron, t1s, t2s, stark, reproduce-all.
const std::vector<std::string>& command_names();

/// Runs `name` with the configuration text (the exact bytes are recorded in
/// the manifest). Throws ConfigError for configuration problems and
/// InvalidInput for unusable options, including a non-empty output directory.
CommandResult run_command(const std::string& name, const std::string& config_text, const RunOptions& opts);

/// Repeats the run recorded in `manifest_path` into `out_dir` and compares
/// every output hash, including nested manifests. exit_code 3 on mismatch.
CommandResult rerun(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir);

/// Fixed-width table of checks.
std::string format_checks(const std::vector<Check>& checks);

}  // namespace qad::pipe
