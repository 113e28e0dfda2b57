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

#include "qad/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <type_traits>
#include <variant>

#include <Eigen/Sparse>
#include <fmt/format.h>

#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"

namespace qad::dyn {
namespace {

using complex = std::complex<double>;
constexpr complex kI{0.0, 1.0};

Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

Matrix lowering(int levels) {
  Matrix m = Matrix::Zero(levels, levels);
  for (int k = 1; k < levels; ++k) m(k - 1, k) = std::sqrt(static_cast<double>(k));
  return m;
}

using Vector = Eigen::VectorXcd;
using Sparse = Eigen::SparseMatrix<complex>;

// kron(x, y) keeping only the nonzero entries.
Sparse sparse_kron(const Matrix& x, const Matrix& y) {
  std::vector<Eigen::Triplet<complex>> entries;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(i, j) == 0.0) continue;
      for (Eigen::Index k = 0; k < y.rows(); ++k) {
        for (Eigen::Index l = 0; l < y.cols(); ++l) {
          if (y(k, l) == 0.0) continue;
          entries.emplace_back(i * y.rows() + k, j * y.cols() + l, x(i, j) * y(k, l));
        }
      }
    }
  }
  Sparse out(x.rows() * y.rows(), x.cols() * y.cols());
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

// Master equation as a sparse superoperator acting on the column-major
// vectorized density matrix: vec(A rho B) = (B^T kron A) vec(rho).
class Liouvillian {
 public:
  Liouvillian(const SystemParams& p, const SegmentContext& ctx) {
    const ModeOperators ops(p);
    const Matrix h = build_hamiltonian(p, ctx.detuning);
    const double gamma_q = ctx.rate == QubitRate::Idle ? p.gamma_q_idle : p.gamma_q_swap;
    std::vector<Matrix> jumps;
    auto add = [&](double rate, const Matrix& op) {
      if (rate > 0) jumps.push_back(std::sqrt(rate) * op);
    };
    add(gamma_q, ops.b);
    add(2.0 * p.gamma_phi_q, ops.nb);
    add(p.gamma_S, ops.a);
    add(2.0 * p.gamma_phi_S, ops.na);
    Matrix heff = h;
    for (const auto& c : jumps) heff -= 0.5 * kI * (c.adjoint() * c);
    norm_ = heff.cwiseAbs().colwise().sum().maxCoeff() + 1.0;

    const Matrix& id = ops.identity;
    fixed_ = sparse_kron(id, -kI * heff) + sparse_kron(kI * heff.conjugate(), id);
    for (const auto& c : jumps) fixed_ += sparse_kron(c.conjugate(), c);
    fixed_.makeCompressed();
    if (ctx.drive && ctx.drive->amplitude != 0.0) {
      const double eps = ctx.drive->amplitude;
      const Matrix at = ops.a.transpose();
      plus_ = eps * (sparse_kron(id, -kI * ops.a) + sparse_kron(kI * at, id));
      minus_ = eps * (sparse_kron(id, -kI * at) + sparse_kron(kI * ops.a, id));
      drive_detuning_ = ctx.drive->detuning;
      driven_ = true;
    }
    scratch_.resize(fixed_.rows());
  }

  double norm_estimate() const { return norm_; }

  void apply(double t, const Vector& x, Vector& out) {
    out.noalias() = fixed_ * x;
    if (driven_) {
      const complex phase = std::exp(kI * drive_detuning_ * t);
      scratch_.noalias() = plus_ * x;
      out += phase * scratch_;
      scratch_.noalias() = minus_ * x;
      out += std::conj(phase) * scratch_;
    }
  }

 private:
  Sparse fixed_, plus_, minus_;
  Vector scratch_;
  double norm_ = 1.0;
  double drive_detuning_ = 0.0;
  bool driven_ = false;
};

void check_density_matrix(const Matrix& rho, int dim) {
  if (rho.rows() != dim || rho.cols() != dim) {
    throw InvalidInput(fmt::format("rho0: expected {}x{} matrix", dim, dim));
  }
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9) throw InvalidInput("rho0: not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-9) throw InvalidInput("rho0: trace is not 1");
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  const double min_eig =
      Eigen::SelfAdjointEigenSolver<Matrix>(herm, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (min_eig < -1e-9) throw InvalidInput("rho0: not positive semidefinite");
}

void check_finite(const Vector& v, double t) {
  if (!v.allFinite()) throw IntegratorDiverged(fmt::format("non-finite state at t = {:.6e} s", t));
}

// Dormand-Prince 5(4) with FSAL; advances the state from t0 to t1 exactly.
class DormandPrince {
 public:
  DormandPrince(Liouvillian& rhs, const IntegratorOptions& opts, Eigen::Index size)
      : rhs_(rhs), opts_(opts) {
    for (auto& k : k_) k.resize(size);
    stage_.resize(size);
    next_.resize(size);
    err_.resize(size);
    h_ = 0.05 / rhs.norm_estimate();
  }

  void advance(Vector& y, double t0, double t1) {
    double t = t0;
    if (!fsal_valid_) {
      rhs_.apply(t, y, k_[0]);
      fsal_valid_ = true;
    }
    while (t < t1) {
      const bool last = t + h_ >= t1;
      const double h = last ? t1 - t : h_;
      if (h <= 1e-15 * std::max(std::abs(t), t1 - t0)) {
        if (last) break;
        throw IntegratorDiverged(fmt::format("step size underflow at t = {:.6e} s", t));
      }
      step(y, t, h);
      double err = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double scale = opts_.atol + opts_.rtol * std::max(std::abs(y(i)), std::abs(next_(i)));
        err = std::max(err, std::abs(err_(i)) / scale);
      }
      if (!std::isfinite(err)) throw IntegratorDiverged(fmt::format("non-finite error at t = {:.6e} s", t));
      const double factor = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        t = last ? t1 : t + h;
        y.swap(next_);
        k_[0].swap(k_[6]);
        // A step clipped to land on t1 does not shrink the carried step.
        h_ = last ? std::max(h_, h * factor) : h * factor;
      } else {
        h_ = h * factor;
      }
    }
    check_finite(y, t1);
  }

 private:
  void step(const Vector& y, double t, double h) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = b1 - 5179.0 / 57600.0, e3 = b3 - 7571.0 / 16695.0,
                            e4 = b4 - 393.0 / 640.0, e5 = b5 + 92097.0 / 339200.0,
                            e6 = b6 - 187.0 / 2100.0, e7 = -1.0 / 40.0;

    stage_ = y + h * a21 * k_[0];
    rhs_.apply(t + h / 5.0, stage_, k_[1]);
    stage_ = y + h * (a31 * k_[0] + a32 * k_[1]);
    rhs_.apply(t + 3.0 * h / 10.0, stage_, k_[2]);
    stage_ = y + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
    rhs_.apply(t + 4.0 * h / 5.0, stage_, k_[3]);
    stage_ = y + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
    rhs_.apply(t + 8.0 * h / 9.0, stage_, k_[4]);
    stage_ = y + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
    rhs_.apply(t + h, stage_, k_[5]);
    next_ = y + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);
    rhs_.apply(t + h, next_, k_[6]);
    err_ = h * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] + e7 * k_[6]);
  }

  Liouvillian& rhs_;
  const IntegratorOptions& opts_;
  Vector k_[7];
  Vector stage_, next_, err_;
  double h_ = 0.0;
  bool fsal_valid_ = false;
};

void rk4_advance(Liouvillian& rhs, Vector& y, double t0, double t1, double max_step) {
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / max_step - 1e-9));
  if (steps <= 0) return;
  const double h = (t1 - t0) / static_cast<double>(steps);
  Vector k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
  double t = t0;
  for (long s = 0; s < steps; ++s) {
    rhs.apply(t, y, k1);
    tmp = y + 0.5 * h * k1;
    rhs.apply(t + 0.5 * h, tmp, k2);
    tmp = y + 0.5 * h * k2;
    rhs.apply(t + 0.5 * h, tmp, k3);
    tmp = y + h * k3;
    rhs.apply(t + h, tmp, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t0 + h * static_cast<double>(s + 1);
  }
  check_finite(y, t1);
}

Matrix qubit_rotation(const SystemParams& p, double angle, double axis_phase) {
  Matrix u = Matrix::Identity(p.q_levels, p.q_levels);
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  const complex off_ge = -kI * s * std::exp(-kI * axis_phase);
  u(0, 0) = c;
  u(1, 1) = c;
  u(0, 1) = off_ge;
  u(1, 0) = -kI * s * std::exp(kI * axis_phase);
  return kron(u, Matrix::Identity(p.n_max + 1, p.n_max + 1));
}

void record(Trajectory& traj, const SystemParams& p, double t, const Matrix& rho, bool snapshots) {
  traj.times.push_back(t);
  traj.p_e.push_back(excited_population(p, rho));
  traj.n_mean.push_back(phonon_number(p, rho));
  if (snapshots) traj.snapshots.push_back(rho);
}

}  // namespace

void SystemParams::validate() const {
  if (n_max < 2) throw TruncationTooSmall(fmt::format("n_max = {} (need >= 2)", n_max));
  if (q_levels != 2 && q_levels != 3) throw InvalidInput("q_levels must be 2 or 3");
  if (eta > 0) throw InvalidInput("anharmonicity must be <= 0");
  for (double r : {gamma_q_idle, gamma_q_swap, gamma_phi_q, gamma_S, gamma_phi_S}) {
    if (!(r >= 0)) throw InvalidInput("decay and dephasing rates must be >= 0");
  }
}

double pure_dephasing_rate(double t1, double t2) {
  if (!(t1 > 0 && t2 > 0)) throw InvalidInput("pure_dephasing_rate: T1 and T2 must be > 0");
  const double rate = 1.0 / t2 - 1.0 / (2.0 * t1);
  if (rate < 0) {
    warn(fmt::format("T2 = {:.3e} s exceeds 2 T1 = {:.3e} s; pure dephasing clamped to 0", t2, 2 * t1));
    return 0.0;
  }
  return rate;
}

ModeOperators::ModeOperators(const SystemParams& p) {
  const int nf = p.n_max + 1;
  const Matrix iq = Matrix::Identity(p.q_levels, p.q_levels);
  const Matrix in = Matrix::Identity(nf, nf);
  b = kron(lowering(p.q_levels), in);
  a = kron(iq, lowering(nf));
  nb = b.adjoint() * b;
  na = a.adjoint() * a;
  identity = Matrix::Identity(p.dimension(), p.dimension());
}

Matrix build_hamiltonian(const SystemParams& p, double frame_detuning) {
  p.validate();
  const ModeOperators ops(p);
  Matrix h = frame_detuning * ops.nb;
  h += 0.5 * p.eta * (ops.nb * (ops.nb - ops.identity));
  h += p.g_c * (ops.a.adjoint() * ops.b + ops.a * ops.b.adjoint());
  return h;
}

Matrix basis_state(const SystemParams& p, int qubit_level, int phonons) {
  if (qubit_level < 0 || qubit_level >= p.q_levels || phonons < 0 || phonons > p.n_max) {
    throw InvalidInput("basis_state: level outside the truncated space");
  }
  const int idx = qubit_level * (p.n_max + 1) + phonons;
  Matrix rho = Matrix::Zero(p.dimension(), p.dimension());
  rho(idx, idx) = 1.0;
  return rho;
}

double excited_population(const SystemParams& p, const Matrix& rho) {
  const int nf = p.n_max + 1;
  double s = 0.0;
  for (int n = 0; n < nf; ++n) s += rho(nf + n, nf + n).real();
  return s;
}

double phonon_number(const SystemParams& p, const Matrix& rho) {
  const int nf = p.n_max + 1;
  double s = 0.0;
  for (int q = 0; q < p.q_levels; ++q) {
    for (int n = 1; n < nf; ++n) s += n * rho(q * nf + n, q * nf + n).real();
  }
  return s;
}

Trajectory lindblad_evolve(const Matrix& rho0, const SystemParams& p, const SegmentContext& ctx,
                           std::span<const double> t_grid, const IntegratorOptions& opts) {
  p.validate();
  check_density_matrix(rho0, p.dimension());
  if (t_grid.empty()) throw InvalidInput("lindblad_evolve: empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidInput("lindblad_evolve: times must increase");
  }
  Liouvillian rhs(p, ctx);
  Trajectory traj;
  const int dim = p.dimension();
  Vector y = Eigen::Map<const Vector>(rho0.data(), rho0.size());
  auto sample = [&](double t) {
    const Matrix rho = Eigen::Map<const Matrix>(y.data(), dim, dim);
    record(traj, p, t, rho, opts.keep_snapshots);
  };
  sample(t_grid[0]);
  if (opts.method == IntegratorOptions::Method::Adaptive) {
    DormandPrince stepper(rhs, opts, y.size());
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      stepper.advance(y, t_grid[i - 1], t_grid[i]);
      sample(t_grid[i]);
    }
  } else {
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      rk4_advance(rhs, y, t_grid[i - 1], t_grid[i], opts.fixed_step);
      sample(t_grid[i]);
    }
  }
  Matrix rho = Eigen::Map<const Matrix>(y.data(), dim, dim);
  traj.final_state = std::move(rho);
  return traj;
}

void PulseSequence::validate() const {
  if (segments.empty() || !std::holds_alternative<Readout>(segments.back())) {
    throw InvalidInput("pulse sequence: must end with Readout");
  }
  int readouts = 0;
  for (const auto& seg : segments) {
    if (std::holds_alternative<Readout>(seg)) ++readouts;
    const double duration = std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SwapInteraction> || std::is_same_v<T, Idle> ||
                        std::is_same_v<T, CavityDrive>) {
            return s.duration;
          } else {
            return 0.0;
          }
        },
        seg);
    if (!(duration >= 0)) throw InvalidInput("pulse sequence: negative duration");
  }
  if (readouts != 1) throw InvalidInput("pulse sequence: exactly one Readout required");
}

Trajectory run_sequence(const PulseSequence& seq, const SystemParams& p,
                        const SequenceOptions& opts) {
  p.validate();
  return run_sequence(seq, p, basis_state(p, 0, 0), opts);
}

Trajectory run_sequence(const PulseSequence& seq, const SystemParams& p, const Matrix& rho0,
                        const SequenceOptions& opts) {
  seq.validate();
  p.validate();
  check_density_matrix(rho0, p.dimension());
  Trajectory traj;
  Matrix rho = rho0;
  double t = 0.0;
  record(traj, p, t, rho, opts.integrator.keep_snapshots);
  const int samples = std::max(1, opts.samples_per_segment);

  auto evolve = [&](double duration, const SegmentContext& ctx) {
    if (duration <= 0) return;
    std::vector<double> grid(static_cast<std::size_t>(samples) + 1);
    for (int i = 0; i <= samples; ++i) grid[i] = t + duration * i / samples;
    grid.back() = t + duration;
    Trajectory seg = lindblad_evolve(rho, p, ctx, grid, opts.integrator);
    for (std::size_t i = 1; i < seg.times.size(); ++i) {
      traj.times.push_back(seg.times[i]);
      traj.p_e.push_back(seg.p_e[i]);
      traj.n_mean.push_back(seg.n_mean[i]);
      if (opts.integrator.keep_snapshots) traj.snapshots.push_back(seg.snapshots[i]);
    }
    rho = std::move(seg.final_state);
    // Re-hermitize against round-off accumulated over long sequences.
    rho = 0.5 * (rho + rho.adjoint()).eval();
    t = grid.back();
  };

  for (const auto& seg : seq.segments) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, XGate>) {
            const Matrix u = qubit_rotation(p, kPi, 0.0);
            rho = (u * rho * u.adjoint()).eval();
          } else if constexpr (std::is_same_v<T, HalfXGate>) {
            const Matrix u = qubit_rotation(p, kPi / 2.0, s.axis_phase);
            rho = (u * rho * u.adjoint()).eval();
          } else if constexpr (std::is_same_v<T, SwapInteraction>) {
            evolve(s.duration, SegmentContext{s.detuning, QubitRate::Swap, std::nullopt});
          } else if constexpr (std::is_same_v<T, Idle>) {
            evolve(s.duration, SegmentContext{s.detuning, QubitRate::Idle, std::nullopt});
          } else if constexpr (std::is_same_v<T, CavityDrive>) {
            evolve(s.duration, SegmentContext{p.detuning(), QubitRate::Idle,
                                              Drive{s.amplitude, s.drive_detuning}});
          } else {
            traj.readout = excited_population(p, rho);
          }
        },
        seg);
  }
  traj.final_state = std::move(rho);
  return traj;
}

double swap_duration(const SystemParams& p) {
  if (p.g_c == 0.0) throw ZeroDetuning("swap_duration: coupling is zero");
  return kPi / (2.0 * std::abs(p.g_c));
}

PulseSequence t1s_sequence(const SystemParams& p, double delay, double t_swap) {
  return PulseSequence{{XGate{}, SwapInteraction{t_swap, 0.0}, Idle{delay, p.detuning()},
                        SwapInteraction{t_swap, 0.0}, Readout{}}};
}

PulseSequence t2s_sequence(const SystemParams& p, double delay, double t_swap, double ramsey_rate) {
  return PulseSequence{{HalfXGate{0.0}, SwapInteraction{t_swap, 0.0}, Idle{delay, p.detuning()},
                        SwapInteraction{t_swap, 0.0}, HalfXGate{ramsey_rate * delay}, Readout{}}};
}

double truncation_error(const PulseSequence& seq, const SystemParams& p,
                        const SequenceOptions& opts) {
  SystemParams bigger = p;
  bigger.n_max += 4;
  const Trajectory small = run_sequence(seq, p, opts);
  const Trajectory large = run_sequence(seq, bigger, opts);
  double diff = 0.0;
  for (std::size_t i = 0; i < small.times.size(); ++i) {
    diff = std::max(diff, std::abs(small.p_e[i] - large.p_e[i]));
    diff = std::max(diff, std::abs(small.n_mean[i] - large.n_mean[i]));
  }
  if (small.readout && large.readout) diff = std::max(diff, std::abs(*small.readout - *large.readout));
  return diff;
}

ChevronMap vacuum_rabi_chevron(const SystemParams& p, std::span<const double> detunings,
                               std::span<const double> t_grid, const IntegratorOptions& opts) {
  if (detunings.empty() || t_grid.empty()) throw InvalidInput("vacuum_rabi_chevron: empty grid");
  ChevronMap map;
  map.detunings.assign(detunings.begin(), detunings.end());
  map.times.assign(t_grid.begin(), t_grid.end());
  map.p_e.resize(static_cast<Eigen::Index>(detunings.size()), static_cast<Eigen::Index>(t_grid.size()));
  const Matrix rho0 = basis_state(p, 1, 0);
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    const Trajectory tr =
        lindblad_evolve(rho0, p, SegmentContext{detunings[i], QubitRate::Swap, std::nullopt}, t_grid, opts);
    for (std::size_t j = 0; j < tr.p_e.size(); ++j) {
      map.p_e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = tr.p_e[j];
    }
  }
  return map;
}

double dispersive_chi(double g, double detuning, double eta) {
  if (detuning == 0.0 || detuning + eta == 0.0) throw ZeroDetuning("dispersive_chi: resonant denominator");
  return g * g * eta / (detuning * (detuning + eta));
}

namespace {

// Energy of the dressed state adiabatically connected to |q, n>, from the
// block with N = q + n excitations (frame at omega0').
double dressed_energy(const SystemParams& p, int q, int n) {
  const int total = q + n;
  std::vector<int> levels;
  for (int k = 0; k < p.q_levels && k <= total; ++k) levels.push_back(k);
  const auto dim = static_cast<Eigen::Index>(levels.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const double delta = p.detuning();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double k = levels[i];
    h(i, i) = delta * k + 0.5 * p.eta * k * (k - 1);
    if (i + 1 < dim) {
      const double phonons = total - k;
      h(i, i + 1) = h(i + 1, i) = p.g_c * std::sqrt(k + 1) * std::sqrt(phonons);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  Eigen::Index best = 0;
  es.eigenvectors().row(q).cwiseAbs().maxCoeff(&best);
  return es.eigenvalues()(best);
}

}  // namespace

double dressed_shift(const SystemParams& p, int phonons) {
  if (phonons < 0) throw InvalidInput("dressed_shift: negative phonon number");
  const auto transition = [&](int n) { return dressed_energy(p, 1, n) - dressed_energy(p, 0, n); };
  return transition(phonons) - transition(0);
}

double steady_state_phonons(double amplitude, double gamma_S, double drive_detuning) {
  const double denom = 0.25 * gamma_S * gamma_S + drive_detuning * drive_detuning;
  if (denom == 0.0) {
    if (amplitude == 0.0) return 0.0;
    throw InvalidInput("steady_state_phonons: undamped resonant drive has no steady state");
  }
  return amplitude * amplitude / denom;
}

std::vector<StarkPoint> stark_scan(const SystemParams& p, std::span<const double> amplitudes,
                                   double drive_detuning) {
  SystemParams q3 = p;
  q3.q_levels = 3;
  q3.validate();
  if (p.detuning() == 0.0) throw ZeroDetuning("stark_scan: qubit on resonance with the cavity");
  const double ratio = std::abs(p.g_c / p.detuning());
  if (ratio >= 0.15) warn(fmt::format("stark_scan: |g/Delta| = {:.3f} outside the dispersive regime", ratio));

  std::vector<double> shift_cache;
  auto shift_at = [&](int n) {
    while (static_cast<int>(shift_cache.size()) <= n) {
      shift_cache.push_back(dressed_shift(q3, static_cast<int>(shift_cache.size())));
    }
    return shift_cache[n];
  };
  std::vector<StarkPoint> out;
  for (double eps : amplitudes) {
    const double nbar = steady_state_phonons(eps, p.gamma_S, drive_detuning);
    double shift = 0.0;
    if (nbar > 0.0) {
      const int cutoff = static_cast<int>(std::ceil(nbar + 12.0 * std::sqrt(nbar) + 20.0));
      for (int n = 1; n <= cutoff; ++n) {
        const double logp = n * std::log(nbar) - nbar - std::lgamma(n + 1.0);
        shift += std::exp(logp) * shift_at(n);
      }
    }
    out.push_back({nbar, shift});
  }
  return out;
}

double purcell_rate(const SystemParams& p) {
  if (p.detuning() == 0.0) throw ZeroDetuning("purcell_rate: zero detuning");
  const double r = p.g_c / p.detuning();
  return r * r * p.gamma_q_idle;
}

double quality_factor(double omega0p, double t1s) { return omega0p * t1s; }

}  // namespace qad::dyn
