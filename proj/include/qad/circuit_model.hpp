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

// Transmon, gmon and the tunable qubit-phonon coupling.

#include <optional>
#include <span>
#include <vector>

namespace qad::circuit {

/// Energies in Hz (E / h).
struct TransmonParams {
  double shunt_capacitance = 108e-15;  // C_p, F
  double charging_energy = 0.18e9;     // E_c / h
  double max_josephson_energy = 22.5e9;  // E_j0 / h
  double flux_ratio = 0.0;             // Phi_e / Phi_0

  double anharmonicity() const { return -charging_energy; }  // Hz
  /// E_J(Phi) = E_j0 |cos(pi Phi_e / Phi_0)|.
  double josephson_energy() const;
  void validate() const;
};

struct GmonParams {
  double l_g = 475e-12;   // qubit-side loop inductance, H
  double l_f = 523e-12;   // SAW-side loop inductance, H
  double l_c0 = 645e-12;  // junction inductance at zero phase, H
  double delta = 0.0;     // junction phase, rad

  /// (L_g + L_f) / L_c0.
  double loop_beta() const { return (l_g + l_f) / l_c0; }
  void validate() const;
};

struct CouplingLedger {
  double l_j = 10e-9;             // transmon inductance, H
  double l_s = 186e-9;            // SAW motional inductance, H
  double omega0p = 0.0;           // SAW mode, rad/s
  GmonParams gmon;

  void validate() const;
};

/// Ledger of the reference device with omega0' = 2 pi 3.901 GHz.
CouplingLedger reference_ledger();

/// E_c / h = e^2 / (2 C_p h), in Hz.
double ec_from_capacitance(double capacitance);

/// f_q = sqrt(8 E_c E_J(Phi)) - E_c in Hz. Warns within 1% of the cosine zero
/// and below E_j0/E_c = 20.
double transmon_frequency(const TransmonParams& p);

/// Josephson inductance (Phi_0 / 2 pi)^2 / (h E_J) for E_J in Hz.
double josephson_inductance(double josephson_energy_hz);

/// L_c = L_c0 / cos(delta); negative in the inductive pole region.
/// Throws PhasePole when |cos delta| <= 1e-6.
double gmon_lc(const GmonParams& g);

/// Signed coupling g_c in rad/s. Throws CouplingPole when
/// |L_g + L_f + L_c| < 1e-3 (L_g + L_f) and PhasePole from gmon_lc.
double coupling_strength(const CouplingLedger& ledger);

/// Junction phase in (-pi, pi] that realizes target_g (rad/s) to relative
/// 1e-6. Searches the monotone branches [0, pi/2), (pi/2, pole), (pole, pi]
/// in that order. Throws Unreachable when none attains the target.
double solve_delta_for_g(double target_g, const CouplingLedger& ledger);

/// Solves delta + beta sin(delta) = phi_bias on the branch continuously
/// connected to delta = 0 (see RF-SQUID branch notes in the README).
double gmon_delta_from_bias(double phi_bias, double loop_beta);

struct CouplingPoint {
  double bias = 0.0;
  double delta = 0.0;
  std::optional<double> coupling;  // rad/s; empty next to a pole
};

std::vector<CouplingPoint> coupling_bias_curve(std::span<const double> bias_grid,
                                               const CouplingLedger& ledger,
                                               std::optional<double> loop_beta = std::nullopt);

}  // namespace qad::circuit
