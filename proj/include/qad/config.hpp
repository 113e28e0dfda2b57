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

// Device configuration: an INI file whose key names carry SI units.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qad/circuit_model.hpp"
#include "qad/dynamics.hpp"
#include "qad/saw_model.hpp"

namespace qad::config {

struct SweepSettings {
  // saw-response
  double saw_f_min_hz = 3.85e9;
  double saw_f_max_hz = 4.45e9;
  std::size_t saw_points = 6001;
  double bvd_span_linewidths = 10.0;
  std::size_t bvd_points = 4001;
  double s11_noise = 0.0;  // per quadrature
  // coupling-map
  double bias_min_rad = -3.4;
  double bias_max_rad = 3.4;
  std::size_t bias_points = 681;
  // chevron
  double chevron_coupling_hz = -20.6e6;
  double chevron_span_hz = 103e6;  // detunings cover [-span, span]
  std::size_t chevron_detunings = 21;
  double chevron_t_max_s = 200e-9;
  std::size_t chevron_times = 401;
  // t1s / t2s
  double t1_delay_max_s = 1e-6;
  std::size_t t1_points = 41;
  double t2_delay_max_s = 600e-9;
  std::size_t t2_points = 121;
  double t2_ramsey_detuning_hz = 15e6;
  // stark
  std::vector<double> stark_amplitudes_rad_per_s = {0.0, 1e6, 2e6, 3e6, 4e6, 5e6};
  std::vector<double> stark_couplings_hz = {10.3e6, 20.6e6};
  double stark_drive_detuning_hz = 0.0;
};

struct IntegratorSettings {
  dyn::SequenceOptions sequence;
};

struct DeviceConfig {
  saw::SawGeometry geometry;
  saw::BvdParams bvd;
  double reference_impedance = 50.0;
  bool bvd_resonance_given = false;
  circuit::TransmonParams transmon;
  circuit::CouplingLedger ledger;
  std::optional<double> loop_beta;
  dyn::SystemParams system;  // idle-point parameters
  std::optional<double> coupling_override_hz;
  double idle_detuning_hz = 300e6;
  double stark_detuning_hz = -300e6;
  std::optional<double> swap_duration_s;
  SweepSettings sweeps;
  IntegratorSettings integrator;
  std::filesystem::path output_directory = "qadsim-out";
  std::uint64_t seed = 0;

  /// Loop beta used by the RF-SQUID solver.
  double gmon_loop_beta() const { return loop_beta.value_or(ledger.gmon.loop_beta()); }
  /// Swap duration: explicit override or pi / (2 |g_c|).
  double swap_time() const;
};

/// Parses and validates. Errors are ConfigError naming the key path, for
/// example `gmon.l_g_henry`.
DeviceConfig parse_config(const std::string& text);
DeviceConfig load_config(const std::filesystem::path& path);

}  // namespace qad::config
