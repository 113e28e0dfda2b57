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

// Classical electrical response of the SAW cavity: coupling-of-modes IDT and
// Bragg mirror, and the Butterworth-Van Dyke lumped equivalent.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace qad::saw {

using complex = std::complex<double>;

/// Layout of the IDT and mirror gratings. Defaults describe the reference
/// device (LiNbO3 128 deg Y-X, 240 nm electrodes).
struct SawGeometry {
  double electrode_width = 240e-9;   // d, m
  double pitch = 4 * 240e-9;         // p = lambda0, m
  int idt_cells = 20;                // N_t
  int mirror_cells = 400;            // N_m per side
  double mirror_separation = 20.5;   // L0 in units of lambda0
  double velocity = 3979.0;          // v_a, m/s
  complex electrode_reflection{0.0, 0.045};
  double coupling_k2 = 0.056;
  double static_capacitance = 744e-15;  // C_t, F
  // Overrides the quasi-static estimate of the peak conductance when set.
  std::optional<double> peak_conductance;

  /// Geometry with pitch = 4 * width and every other field at its default.
  static SawGeometry from_electrode_width(double width);

  void validate() const;
};

/// Lumped equivalent of the SAW resonance.
struct BvdParams {
  double inductance = 0.0;   // L_s, H
  double capacitance = 0.0;  // C_s, F
  double resistance = 0.0;   // R_s, ohm
  double static_capacitance = 0.0;  // C_t, F
  double resonance = 0.0;    // f_0, Hz
  double quality = 0.0;      // Q

  static BvdParams from_motional(double l_s, double c_s, double r_s, double c_t);
  /// C_s = 1 / (omega0^2 L_s).
  static BvdParams from_resonance(double l_s, double r_s, double c_t, double f0);
  /// R_s = Z_s / Q.
  static BvdParams from_quality(double l_s, double c_s, double q, double c_t);

  double characteristic_impedance() const;
  double linewidth() const { return resonance / quality; }  // Hz
  void validate() const;
};

struct FrequencyTrace {
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::vector<complex> values;      // S11

  std::size_t size() const { return frequencies.size(); }
  void validate() const;
};

double geometry_to_f0(const SawGeometry& geom);

/// G_a0 = 8 K^2 f0 C_t N_t unless overridden.
double peak_conductance(const SawGeometry& geom);
double idt_conductance(double f, const SawGeometry& geom);
double idt_susceptance(double f, const SawGeometry& geom);

/// Full width at half maximum of idt_conductance, by root finding.
double idt_bandwidth(const SawGeometry& geom);

/// Transfer matrix of one mirror cell (lambda0/2: half-cell propagation,
/// electrode reflection, half-cell propagation). Maps right-side wave
/// amplitudes (forward, backward) to the left side.
Eigen::Matrix2cd mirror_cell_matrix(double f, const SawGeometry& geom);
complex mirror_reflection(double f, const SawGeometry& geom);

/// Width of the region around the strongest reflection where |Gamma| exceeds
/// `fraction` of the maximum, scanned on n points over [f_lo, f_hi].
double mirror_stopband(const SawGeometry& geom, double f_lo, double f_hi, std::size_t n,
                       double fraction = 0.9);

complex bvd_impedance(double omega, const BvdParams& params);
complex s11_from_impedance(complex z, double z0);
complex impedance_from_s11(complex s11, double z0);

/// S11 of the BVD circuit on `frequencies`, with optional additive complex
/// Gaussian noise of standard deviation `noise_sigma` per quadrature.
FrequencyTrace synthesize_s11(const BvdParams& params, std::span<const double> frequencies,
                              double z0, double noise_sigma = 0.0, std::uint64_t seed = 0);

/// Grid of n points centred on f0 spanning +-half_widths linewidths.
std::vector<double> resonance_grid(const BvdParams& params, std::size_t n,
                                   double half_widths = 10.0);

struct BvdExtraction {
  BvdParams params;
  double static_capacitance_estimate = 0.0;
  std::size_t points_in_linewidth = 0;
  double noise_floor = 0.0;
  double dip_depth = 0.0;
};

/// Recovers BVD parameters from a one-port S11 trace. Throws NoResonanceFound
/// when the |S11| dip does not exceed 3x the noise floor and GridTooCoarse
/// when fewer than 50 points fall inside the fitted linewidth.
BvdExtraction bvd_extract_detailed(const FrequencyTrace& trace, double z0);
BvdParams bvd_extract(const FrequencyTrace& trace, double z0);

}  // namespace qad::saw
