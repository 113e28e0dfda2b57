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

// Open-system dynamics of a Duffing transmon coupled to one phonon mode.
// Everything is in the frame rotating at the SAW frequency omega0'; all
// frequencies and rates are angular (rad/s), times are seconds.

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qad::dyn {

using Matrix = Eigen::MatrixXcd;

struct SystemParams {
  double omega0p = 0.0;  // SAW mode
  double omega_q = 0.0;  // qubit at the idle point
  double g_c = 0.0;      // signed coupling
  double eta = 0.0;      // anharmonicity, <= 0
  double gamma_q_idle = 0.0;
  double gamma_q_swap = 0.0;
  double gamma_phi_q = 0.0;
  double gamma_S = 0.0;
  double gamma_phi_S = 0.0;
  int n_max = 2;     // highest Fock state kept
  int q_levels = 3;  // 2 or 3

  double detuning() const { return omega_q - omega0p; }
  int dimension() const { return q_levels * (n_max + 1); }
  void validate() const;
};

/// gamma_phi = 1/T2 - 1/(2 T1); clamped at 0 with a warning.
double pure_dephasing_rate(double t1, double t2);

/// Operators on the q_levels x (n_max + 1) product space; index q (n_max+1) + n.
struct ModeOperators {
  Matrix b;   // transmon lowering
  Matrix a;   // phonon lowering
  Matrix nb;  // b^dag b
  Matrix na;  // a^dag a
  Matrix identity;

  explicit ModeOperators(const SystemParams& p);
};

/// H = frame_detuning b^dag b + (eta/2) b^dag b^dag b b + g (a^dag b + a b^dag).
/// Throws TruncationTooSmall when n_max < 2.
Matrix build_hamiltonian(const SystemParams& p, double frame_detuning);

/// Density matrix of |qubit_level, phonons>.
Matrix basis_state(const SystemParams& p, int qubit_level, int phonons);

enum class QubitRate { Idle, Swap };

struct Drive {
  double amplitude = 0.0;  // epsilon, rad/s
  double detuning = 0.0;   // delta_d from the frame
};

struct SegmentContext {
  double detuning = 0.0;  // qubit detuning from omega0'
  QubitRate rate = QubitRate::Swap;
  std::optional<Drive> drive;
};

struct IntegratorOptions {
  enum class Method { Adaptive, FixedRK4 };
  Method method = Method::Adaptive;
  double rtol = 1e-8;
  double atol = 1e-10;
  double fixed_step = 0.02e-9;
  bool keep_snapshots = false;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> p_e;
  std::vector<double> n_mean;
  std::vector<Matrix> snapshots;  // filled when IntegratorOptions::keep_snapshots
  std::optional<double> readout;  // P_e reported by a Readout segment
  Matrix final_state;
};

/// Lindblad evolution from rho0 over t_grid (t_grid[0] is the start time of
/// rho0). Collapse channels: sqrt(gamma_q) b, sqrt(2 gamma_phi_q) b^dag b,
/// sqrt(gamma_S) a, sqrt(2 gamma_phi_S) a^dag a.
Trajectory lindblad_evolve(const Matrix& rho0, const SystemParams& p, const SegmentContext& ctx,
                           std::span<const double> t_grid, const IntegratorOptions& opts = {});

double excited_population(const SystemParams& p, const Matrix& rho);
double phonon_number(const SystemParams& p, const Matrix& rho);

// Pulse sequences ------------------------------------------------------------

struct XGate {};
struct HalfXGate {
  double axis_phase = 0.0;  // 0 rotates about X
};
struct SwapInteraction {
  double duration = 0.0;
  double detuning = 0.0;
};
struct Idle {
  double duration = 0.0;
  double detuning = 0.0;
};
struct CavityDrive {
  double amplitude = 0.0;
  double duration = 0.0;
  double drive_detuning = 0.0;
};
struct Readout {};

using Segment = std::variant<XGate, HalfXGate, SwapInteraction, Idle, CavityDrive, Readout>;

struct PulseSequence {
  std::vector<Segment> segments;
  /// Durations >= 0, exactly one Readout and it is last.
  void validate() const;
};

struct SequenceOptions {
  IntegratorOptions integrator;
  int samples_per_segment = 4;
};

/// Runs the sequence from |g, 0>. Gates are instantaneous ideal rotations on
/// the {g, e} subspace; Swap uses swap-point qubit decay, Idle and CavityDrive
/// the idle-point decay. CavityDrive keeps the idle detuning.
Trajectory run_sequence(const PulseSequence& seq, const SystemParams& p,
                        const SequenceOptions& opts = {});
Trajectory run_sequence(const PulseSequence& seq, const SystemParams& p, const Matrix& rho0,
                        const SequenceOptions& opts = {});

/// pi / (2 |g_c|).
double swap_duration(const SystemParams& p);

/// X, Swap, Idle(delay, idle detuning), Swap, Readout.
PulseSequence t1s_sequence(const SystemParams& p, double delay, double t_swap);
/// X/2, Swap, Idle(delay), Swap, X/2 with axis phase ramsey_rate * delay, Readout.
PulseSequence t2s_sequence(const SystemParams& p, double delay, double t_swap,
                           double ramsey_rate = 0.0);

/// Largest population change when n_max grows by 4.
double truncation_error(const PulseSequence& seq, const SystemParams& p,
                        const SequenceOptions& opts = {});

// Vacuum Rabi ----------------------------------------------------------------

struct ChevronMap {
  std::vector<double> detunings;  // rad/s
  std::vector<double> times;      // s
  Eigen::MatrixXd p_e;            // rows: detuning, cols: time
};

/// |e, 0> evolved under SwapInteraction at each detuning.
ChevronMap vacuum_rabi_chevron(const SystemParams& p, std::span<const double> detunings,
                               std::span<const double> t_grid,
                               const IntegratorOptions& opts = {});

// Dispersive shift -------------------------------------------------------------

/// chi = g^2 eta / (Delta (Delta + eta)).
double dispersive_chi(double g, double detuning, double eta);

/// Dressed 0->1 qubit transition with n phonons minus the n = 0 transition,
/// from exact diagonalization of the excitation-number blocks (q_levels = 3
/// unless p says 2). Uses p.detuning().
double dressed_shift(const SystemParams& p, int phonons);

/// Steady-state <n> = eps^2 / ((gamma_S/2)^2 + delta_d^2).
double steady_state_phonons(double amplitude, double gamma_S, double drive_detuning);

struct StarkPoint {
  double n_mean = 0.0;
  double shift = 0.0;  // rad/s
};

/// Poisson-averaged dressed shift for each drive amplitude. Warns when
/// |g/Delta| >= 0.15.
std::vector<StarkPoint> stark_scan(const SystemParams& p, std::span<const double> amplitudes,
                                   double drive_detuning = 0.0);

/// (g/Delta)^2 gamma_q_idle. Throws ZeroDetuning when Delta == 0.
double purcell_rate(const SystemParams& p);

double quality_factor(double omega0p, double t1s);

}  // namespace qad::dyn
