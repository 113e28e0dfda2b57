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

// Plain-text data files. Numbers are written with a fixed format so that
// identical inputs give byte-identical files.

#include <filesystem>
#include <string>
#include <vector>

#include "qad/dynamics.hpp"
#include "qad/saw_model.hpp"

namespace qad::io {

/// Fixed-width scientific notation used for every emitted number.
std::string format_number(double v);

/// Header and rows as written by write_csv.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

/// `frequency_hz,re_s11,im_s11`.
void write_s11_csv(const std::filesystem::path& path, const saw::FrequencyTrace& trace);

/// One-port Touchstone-style text: a `# Z0=<ohms>` line, then
/// `frequency_hz re im` rows; `!` starts a comment.
void write_s11_text(const std::filesystem::path& path, const saw::FrequencyTrace& trace, double z0);

struct S11File {
  saw::FrequencyTrace trace;
  double z0 = 50.0;
};

/// Reads either format, chosen by content: a first data line that contains
/// a comma is CSV (z0 defaults to 50 ohm).
S11File read_s11(const std::filesystem::path& path);

/// `time_s,p_e,n_mean`.
void write_trajectory_csv(const std::filesystem::path& path, const dyn::Trajectory& traj);

/// `detuning_hz,time_s,p_e`, detunings converted from rad/s.
void write_chevron_csv(const std::filesystem::path& path, const dyn::ChevronMap& map);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace qad::io
