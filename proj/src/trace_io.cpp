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

#include "qad/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"

namespace qad::io {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& token, const std::filesystem::path& path, std::size_t line) {
  const std::string t = trim(token);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidInput(fmt::format("{}:{}: cannot parse number '{}'", path.string(), line, t));
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string item;
  while (in >> item) out.push_back(item);
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_number(double v) { return fmt::format("{:.12e}", v); }

void write_csv(const std::filesystem::path& path, const Table& table) {
  auto out = open_out(path);
  std::string text;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    text += (i ? "," : "") + table.header[i];
  }
  text += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw InvalidInput("write_csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      text += format_number(row[i]);
    }
    text += '\n';
  }
  out << text;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  Table table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (table.header.empty()) {
      for (auto& h : split(line, ',')) table.header.push_back(trim(h));
      continue;
    }
    std::vector<double> row;
    for (const auto& tok : split(line, ',')) row.push_back(parse_double(tok, path, lineno));
    if (row.size() != table.header.size()) {
      throw InvalidInput(fmt::format("{}:{}: expected {} columns", path.string(), lineno, table.header.size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw InvalidInput(path.string() + ": missing CSV header");
  return table;
}

void write_s11_csv(const std::filesystem::path& path, const saw::FrequencyTrace& trace) {
  Table t{{"frequency_hz", "re_s11", "im_s11"}, {}};
  for (std::size_t i = 0; i < trace.size(); ++i) {
    t.rows.push_back({trace.frequencies[i], trace.values[i].real(), trace.values[i].imag()});
  }
  write_csv(path, t);
}

void write_s11_text(const std::filesystem::path& path, const saw::FrequencyTrace& trace, double z0) {
  auto out = open_out(path);
  std::string text = "# Z0=" + format_number(z0) + "\n! frequency_hz re_s11 im_s11\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    text += format_number(trace.frequencies[i]) + ' ' + format_number(trace.values[i].real()) + ' ' +
            format_number(trace.values[i].imag()) + '\n';
  }
  out << text;
}

S11File read_s11(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  S11File file;
  std::string line;
  std::size_t lineno = 0;
  bool csv = false, decided = false, header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '!') continue;
    if (line[0] == '#') {
      const auto pos = line.find("Z0=");
      if (pos != std::string::npos) file.z0 = parse_double(line.substr(pos + 3), path, lineno);
      continue;
    }
    if (!decided) {
      csv = line.find(',') != std::string::npos;
      decided = true;
    }
    if (csv && !header_seen) {
      if (line.find("frequency_hz") == std::string::npos) {
        throw InvalidInput(path.string() + ": CSV header must start with frequency_hz");
      }
      header_seen = true;
      continue;
    }
    const auto tokens = csv ? split(line, ',') : split_ws(line);
    if (tokens.size() != 3) throw InvalidInput(fmt::format("{}:{}: expected 3 columns", path.string(), lineno));
    file.trace.frequencies.push_back(parse_double(tokens[0], path, lineno));
    file.trace.values.emplace_back(parse_double(tokens[1], path, lineno), parse_double(tokens[2], path, lineno));
  }
  file.trace.validate();
  return file;
}

void write_trajectory_csv(const std::filesystem::path& path, const dyn::Trajectory& traj) {
  Table t{{"time_s", "p_e", "n_mean"}, {}};
  for (std::size_t i = 0; i < traj.times.size(); ++i) t.rows.push_back({traj.times[i], traj.p_e[i], traj.n_mean[i]});
  write_csv(path, t);
}

void write_chevron_csv(const std::filesystem::path& path, const dyn::ChevronMap& map) {
  Table t{{"detuning_hz", "time_s", "p_e"}, {}};
  for (std::size_t i = 0; i < map.detunings.size(); ++i) {
    for (std::size_t j = 0; j < map.times.size(); ++j) {
      t.rows.push_back({rad_to_hz(map.detunings[i]), map.times[j],
                        map.p_e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    }
  }
  write_csv(path, t);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qad::io
