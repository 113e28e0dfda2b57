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

#include <cmath>
#include <filesystem>
#include <regex>
#include <string>

#include <gtest/gtest.h>

#include "qad/config.hpp"
#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"
#include "qad/manifest.hpp"
#include "qad/trace_io.hpp"

namespace qad {
namespace {

namespace fs = std::filesystem;

std::string reference_config() { return io::read_text(fs::path(QAD_SOURCE_DIR) / "configs" / "device_reference.cfg"); }

// Replaces `key = ...` inside the config text, or appends it to `section`.
std::string with_value(std::string text, const std::string& section, const std::string& key, const std::string& value) {
  const std::regex line("(^|\n)" + key + " = [^\n]*");
  if (std::regex_search(text, line)) return std::regex_replace(text, line, "$1" + key + " = " + value);
  const std::string header = "[" + section + "]\n";
  const auto pos = text.find(header);
  if (pos == std::string::npos) return text + "\n" + header + key + " = " + value + "\n";
  return text.insert(pos + header.size(), key + " = " + value + "\n");
}

std::string error_key(const std::string& text) {
  try {
    config::parse_config(text);
  } catch (const ConfigError& e) {
    return e.key_path();
  }
  return "<none>";
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qad_config_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(ConfigTest, ReferenceConfigLoads) {
  const auto cfg = config::parse_config(reference_config());
  EXPECT_DOUBLE_EQ(cfg.geometry.pitch, 960e-9);
  EXPECT_NEAR(std::abs(cfg.geometry.electrode_reflection), 0.045, 1e-15);
  EXPECT_NEAR(rad_to_hz(cfg.system.g_c), 6.672e6, 0.01e6);
  EXPECT_NEAR(rad_to_hz(cfg.system.detuning()), 300e6, 1e-3);
  EXPECT_NEAR(cfg.system.gamma_S, 1.0 / 205e-9, 1e-6);
  EXPECT_EQ(cfg.system.q_levels, 3);
  EXPECT_EQ(cfg.seed, 2026u);
  EXPECT_EQ(cfg.sweeps.stark_couplings_hz.size(), 2u);
  EXPECT_NEAR(cfg.transmon.charging_energy, 0.179e9, 0.002e9);
}

TEST(ConfigTest, EmptyConfigUsesDefaults) {
  const auto cfg = config::parse_config("");
  EXPECT_NEAR(rad_to_hz(cfg.system.g_c), 6.672e6, 0.01e6);
  EXPECT_EQ(cfg.sweeps.t1_points, 41u);
}

TEST(ConfigTest, ErrorsNameTheKeyPath) {
  const std::string base = reference_config();
  EXPECT_EQ(error_key(with_value(base, "gmon", "l_g_henry", "-1e-12")), "gmon.l_g_henry");
  EXPECT_EQ(error_key(with_value(base, "saw", "electrode_width_m", "240")), "saw.electrode_width_m");
  EXPECT_EQ(error_key(with_value(base, "saw", "idt_cells", "0")), "saw.idt_cells");
  EXPECT_EQ(error_key(with_value(base, "saw", "electrode_reflection_abs", "1.5")), "saw.electrode_reflection_abs");
  EXPECT_EQ(error_key(with_value(base, "system", "fock_cutoff", "1")), "system.fock_cutoff");
  EXPECT_EQ(error_key(with_value(base, "system", "transmon_levels", "4")), "system.transmon_levels");
  EXPECT_EQ(error_key(with_value(base, "system", "anharmonicity_hz", "180e6")), "system.anharmonicity_hz");
  EXPECT_EQ(error_key(with_value(base, "system", "phonon_t1_s", "abc")), "system.phonon_t1_s");
  EXPECT_EQ(error_key(with_value(base, "sweeps", "stark_amplitudes_rad_per_s", "")), "sweeps.stark_amplitudes_rad_per_s");
  EXPECT_EQ(error_key(with_value(base, "integrator", "method", "euler")), "integrator.method");
  EXPECT_EQ(error_key(with_value(base, "saw", "bogus_key", "1")), "saw.bogus_key");
  EXPECT_EQ(error_key(with_value(base, "gmon", "delta_rad", "1.5707963267948966")), "gmon.delta_rad");
}

TEST(ConfigTest, ResonanceMustMatchSawFrequency) {
  std::string text = reference_config();
  text = std::regex_replace(text, std::regex("motional_capacitance_f = [^\n]*\n"), "");
  EXPECT_EQ(error_key(with_value(text, "bvd", "resonance_hz", "3.95e9")), "coupling.saw_frequency_hz");
  const auto ok = config::parse_config(with_value(text, "bvd", "resonance_hz", "3.92e9"));
  EXPECT_NEAR(ok.bvd.resonance, 3.92e9, 1.0);
  EXPECT_EQ(error_key(with_value(reference_config(), "bvd", "resonance_hz", "3.92e9")), "bvd.motional_capacitance_f");
}

TEST(ConfigTest, CouplingOverrideAndSwapDuration) {
  std::string text = with_value(reference_config(), "system", "coupling_hz", "5e6");
  auto cfg = config::parse_config(text);
  EXPECT_NEAR(rad_to_hz(cfg.system.g_c), 5e6, 1e-6);
  EXPECT_NEAR(cfg.swap_time(), 1.0 / (4.0 * 5e6), 1e-15);
  cfg = config::parse_config(with_value(text, "system", "swap_duration_s", "40e-9"));
  EXPECT_DOUBLE_EQ(cfg.swap_time(), 40e-9);
}

TEST(ConfigTest, MissingFileIsConfigError) {
  EXPECT_THROW(config::load_config("/nonexistent/device.cfg"), ConfigError);
}

TEST(TraceIoTest, CsvRoundTrip) {
  const auto dir = scratch_dir("csv");
  saw::FrequencyTrace t;
  for (int i = 0; i < 5; ++i) {
    t.frequencies.push_back(4e9 + i * 1e6);
    t.values.emplace_back(0.1 * i, -0.01 * i);
  }
  io::write_s11_csv(dir / "s.csv", t);
  EXPECT_EQ(io::read_text(dir / "s.csv").substr(0, 28), "frequency_hz,re_s11,im_s11\n4");
  const auto back = io::read_s11(dir / "s.csv");
  ASSERT_EQ(back.trace.size(), 5u);
  EXPECT_DOUBLE_EQ(back.z0, 50.0);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(back.trace.frequencies[i], t.frequencies[i], 1e-12 * t.frequencies[i]);
    EXPECT_NEAR(std::abs(back.trace.values[i] - t.values[i]), 0.0, 1e-12);
  }
}

TEST(TraceIoTest, TextFormatCarriesReferenceImpedance) {
  const auto dir = scratch_dir("s1p");
  saw::FrequencyTrace t{{1e9, 2e9}, {{0.5, 0.1}, {0.4, -0.2}}};
  io::write_s11_text(dir / "s.s1p", t, 75.0);
  const auto back = io::read_s11(dir / "s.s1p");
  EXPECT_DOUBLE_EQ(back.z0, 75.0);
  EXPECT_EQ(back.trace.size(), 2u);
  EXPECT_DOUBLE_EQ(back.trace.values[1].imag(), -0.2);
}

TEST(TraceIoTest, MalformedFilesRejected) {
  const auto dir = scratch_dir("bad");
  io::write_text(dir / "a.csv", "frequency_hz,re_s11,im_s11\n1e9,0.1\n");
  EXPECT_THROW(io::read_s11(dir / "a.csv"), InvalidInput);
  io::write_text(dir / "b.csv", "frequency_hz,re_s11,im_s11\n1e9,x,0\n");
  EXPECT_THROW(io::read_s11(dir / "b.csv"), InvalidInput);
  io::write_text(dir / "c.csv", "frequency_hz,re_s11,im_s11\n2e9,0,0\n1e9,0,0\n");
  EXPECT_THROW(io::read_s11(dir / "c.csv"), InvalidInput);
}

TEST(TraceIoTest, TrajectoryAndChevronHeaders) {
  const auto dir = scratch_dir("traj");
  dyn::Trajectory tr;
  tr.times = {0.0, 1e-9};
  tr.p_e = {1.0, 0.5};
  tr.n_mean = {0.0, 0.5};
  io::write_trajectory_csv(dir / "t.csv", tr);
  const auto table = io::read_csv(dir / "t.csv");
  EXPECT_EQ(table.header, (std::vector<std::string>{"time_s", "p_e", "n_mean"}));
  EXPECT_EQ(table.rows.size(), 2u);
  dyn::ChevronMap map{{hz_to_rad(1e6)}, {0.0, 1e-9}, Eigen::MatrixXd::Ones(1, 2)};
  io::write_chevron_csv(dir / "c.csv", map);
  const auto chev = io::read_csv(dir / "c.csv");
  EXPECT_EQ(chev.header, (std::vector<std::string>{"detuning_hz", "time_s", "p_e"}));
  EXPECT_NEAR(chev.rows[0][0], 1e6, 1e-3);
}

TEST(ManifestTest, Sha256KnownAnswer) {
  EXPECT_EQ(manifest::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ManifestTest, WriteReadVerify) {
  const auto dir = scratch_dir("manifest");
  io::write_text(dir / "a.csv", "x\n1\n");
  io::write_text(dir / "sub" / "b.csv", "y\n2\n");
  io::write_text(dir / "nested" / "c.csv", "z\n");
  io::write_text(dir / "nested" / "manifest.json", "{}");
  manifest::RunManifest m;
  m.command = "t1s";
  m.config_text = "[saw]\n";
  m.config_sha256 = manifest::sha256_hex(m.config_text);
  m.tolerances["x"] = 0.02;
  m.outputs = manifest::inventory(dir);
  ASSERT_EQ(m.outputs.size(), 2u);
  EXPECT_EQ(m.outputs[0].path, "a.csv");
  EXPECT_EQ(m.outputs[1].path, "sub/b.csv");
  manifest::write_manifest(dir, m);
  const auto back = manifest::read_manifest(dir / "manifest.json");
  EXPECT_EQ(back.command, "t1s");
  EXPECT_EQ(back.outputs.size(), 2u);
  EXPECT_DOUBLE_EQ(back.tolerances.at("x"), 0.02);
  EXPECT_TRUE(manifest::verify(dir, back).empty());
  io::write_text(dir / "a.csv", "x\n2\n");
  EXPECT_EQ(manifest::verify(dir, back), std::vector<std::string>{"a.csv"});
}

}  // namespace
}  // namespace qad
