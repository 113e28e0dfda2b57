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

// qadsim: command-line front end for the SAW cavity / transmon simulation
// pipelines. Exit status: 0 success, 2 configuration or usage error,
// 3 failed acceptance check (reproduce-all) or irreproducible rerun,
// 4 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "qad/config.hpp"
#include "qad/diagnostics.hpp"
#include "qad/pipelines.hpp"
#include "qad/trace_io.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kNumericalError = 4;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> points;
  std::string s11;
  bool tol_report = false;
};

void print_result(const qad::pipe::CommandResult& r, bool tol_report) {
  for (const auto& line : r.summary) std::cout << line << '\n';
  if (tol_report && !r.checks.empty()) std::cout << qad::pipe::format_checks(r.checks);
  if (!r.error.empty()) std::cerr << "error: " << r.error << '\n';
}

int run(const std::string& command, const CommonFlags& flags) {
  const std::string text = qad::io::read_text(flags.config);
  const auto cfg = qad::config::parse_config(text);
  qad::pipe::RunOptions opts;
  opts.out_dir = flags.out.empty() ? cfg.output_directory / command : std::filesystem::path(flags.out);
  opts.seed = flags.seed;
  opts.points = flags.points;
  if (!flags.s11.empty()) opts.s11_input = flags.s11;
  const auto result = qad::pipe::run_command(command, text, opts);
  print_result(result, flags.tol_report);
  std::cout << "outputs: " << opts.out_dir.string() << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation pipelines for a SAW phonon cavity coupled to a transmon through a gmon"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qadsim 0.1.0");

  CommonFlags flags;
  std::string selected;
  for (const auto& name : qad::pipe::command_names()) {
    auto* sub = app.add_subcommand(name, fmt::format("run the {} pipeline", name));
    sub->add_option("--config", flags.config, "device configuration file (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory (must be empty; default <output.directory>/<command>)");
    sub->add_option("--seed", flags.seed, "random seed for synthetic noise");
    sub->add_option("--points", flags.points, "override the primary grid size");
    sub->add_flag("--tol-report", flags.tol_report, "print every check with its tolerance");
    if (name == "saw-response") {
      sub->add_option("--s11", flags.s11, "extract the BVD circuit from this S11 file instead")->check(CLI::ExistingFile);
    }
    sub->callback([&selected, name] { selected = name; });
  }
  std::string manifest_path;
  auto* rerun = app.add_subcommand("rerun", "repeat a recorded run and compare output hashes");
  rerun->add_option("--manifest", manifest_path, "manifest.json of the run to repeat")->required()->check(CLI::ExistingFile);
  rerun->add_option("--out", flags.out, "output directory for the repeat (must be empty)")->required();
  rerun->add_flag("--tol-report", flags.tol_report, "print every check with its tolerance");
  rerun->callback([&selected] { selected = "rerun"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (selected == "rerun") {
      const auto result = qad::pipe::rerun(manifest_path, flags.out);
      print_result(result, flags.tol_report);
      return result.exit_code;
    }
    return run(selected, flags);
  } catch (const qad::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const qad::InvalidInput& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const qad::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
