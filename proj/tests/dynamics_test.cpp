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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"
#include "qad/fitkit.hpp"

namespace qad::dyn {
namespace {

SystemParams lossless(double g_hz, double detuning_hz, int q_levels = 2) {
  SystemParams p;
  p.omega0p = hz_to_rad(3.901e9);
  p.omega_q = p.omega0p + hz_to_rad(detuning_hz);
  p.g_c = hz_to_rad(g_hz);
  p.eta = hz_to_rad(-180e6);
  p.q_levels = q_levels;
  p.n_max = 2;
  return p;
}

SystemParams device_params() {
  SystemParams p = lossless(6.672e6, 300e6, 3);
  p.gamma_q_idle = 1.0 / 452e-9;
  p.gamma_q_swap = 1.0 / 1881e-9;
  p.gamma_S = 1.0 / 205e-9;
  return p;
}

TEST(DynamicsTest, HamiltonianIsHermitian) {
  const SystemParams p = device_params();
  const Matrix h = build_hamiltonian(p, p.detuning());
  EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-20 * h.cwiseAbs().maxCoeff() + 1e-30);
}

TEST(DynamicsTest, RejectsSmallTruncation) {
  SystemParams p = device_params();
  p.n_max = 1;
  EXPECT_THROW(build_hamiltonian(p, 0.0), TruncationTooSmall);
}

TEST(DynamicsTest, DecoupledLadder) {
  SystemParams p = lossless(0.0, 0.0);
  const double d = hz_to_rad(50e6);
  const Matrix h = build_hamiltonian(p, d);
  for (int q = 0; q < 2; ++q) {
    for (int n = 0; n <= p.n_max; ++n) {
      const int i = q * (p.n_max + 1) + n;
      EXPECT_NEAR(h(i, i).real(), q * d, 1e-6);
    }
  }
}

TEST(DynamicsTest, ResonantDoubletSplitsByTwiceCoupling) {
  const SystemParams p = lossless(20.6e6, 0.0);
  const Matrix h = build_hamiltonian(p, 0.0);
  // Single-excitation block: |g,1> and |e,0>.
  Eigen::Matrix2cd block;
  const int g1 = 1, e0 = p.n_max + 1;
  block << h(g1, g1), h(g1, e0), h(e0, g1), h(e0, e0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
  EXPECT_NEAR(es.eigenvalues()(1) - es.eigenvalues()(0), 2 * p.g_c, 1e-6 * p.g_c);
}

TEST(DynamicsTest, ClosedJaynesCummingsOscillation) {
  for (int levels : {2, 3}) {
    const SystemParams p = lossless(20.6e6, 0.0, levels);
    const auto t = linspace(0, 100e-9, 101);
    const Trajectory tr = lindblad_evolve(basis_state(p, 1, 0), p, {0.0, QubitRate::Swap, {}}, t);
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_NEAR(tr.p_e[i], std::pow(std::cos(p.g_c * t[i]), 2), 1e-6);
    }
  }
}

TEST(DynamicsTest, BarePhononDecay) {
  SystemParams p = lossless(0.0, 0.0);
  p.gamma_S = 1.0 / 205e-9;
  const auto t = linspace(0, 1e-6, 51);
  const Trajectory tr = lindblad_evolve(basis_state(p, 0, 1), p, {0.0, QubitRate::Idle, {}}, t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(tr.n_mean[i], std::exp(-p.gamma_S * t[i]), 1e-8);
  }
}

TEST(DynamicsTest, FitRecoversPureDecayRate) {
  SystemParams p = lossless(0.0, 0.0);
  p.gamma_S = 1.0 / 205e-9;
  const auto t = linspace(0, 800e-9, 81);
  const Trajectory tr = lindblad_evolve(basis_state(p, 0, 1), p, {0.0, QubitRate::Idle, {}}, t);
  const auto fit = fit::nlls_fit(t, tr.n_mean, {fit::ModelKind::ExpDecay, std::nullopt});
  EXPECT_NEAR(fit[1], p.gamma_S, 0.005 * p.gamma_S);
}

TEST(DynamicsTest, DetunedDecayIncludesPurcellTerm) {
  SystemParams p = lossless(6e6, 300e6, 3);
  p.gamma_S = 1.0 / 205e-9;
  p.gamma_q_idle = 1.0 / 5e-9;  // large so the Purcell term is visible
  const auto t = linspace(0, 800e-9, 161);
  const Trajectory tr = lindblad_evolve(basis_state(p, 0, 1), p, {p.detuning(), QubitRate::Idle, {}}, t);
  const auto fit = fit::nlls_fit(t, tr.n_mean, {fit::ModelKind::ExpDecay, std::nullopt});
  const double expected = p.gamma_S + purcell_rate(p);
  EXPECT_NEAR(fit[1], expected, 0.02 * expected);
  EXPECT_GT(fit[1], p.gamma_S * 1.01);
}

TEST(DynamicsTest, RandomizedInvariants) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < 10; ++c) {
    SystemParams p = lossless(5e6 + 20e6 * u(rng), -50e6 + 100e6 * u(rng), u(rng) < 0.5 ? 2 : 3);
    p.gamma_q_swap = 1e6 * u(rng);
    p.gamma_S = 1e7 * u(rng);
    p.gamma_phi_q = 1e6 * u(rng);
    p.gamma_phi_S = 1e6 * u(rng);
    p.n_max = 2 + c % 3;
    IntegratorOptions opts;
    opts.keep_snapshots = true;
    const auto t = linspace(0, 200e-9, 21);
    const Trajectory tr = lindblad_evolve(basis_state(p, 1, 0), p, {p.detuning(), QubitRate::Swap, {}}, t, opts);
    for (const Matrix& rho : tr.snapshots) {
      EXPECT_LT(std::abs(rho.trace() - 1.0), 1e-8);
      EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
      const Matrix herm = 0.5 * (rho + rho.adjoint());
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(herm).eigenvalues().minCoeff(), -1e-8);
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_LE(tr.p_e[i], 1.0 + 1e-9);
      EXPECT_GE(tr.n_mean[i], -1e-9);
    }
  }
}

TEST(DynamicsTest, ExcitationConservedWithoutDissipation) {
  const SystemParams p = lossless(15e6, 20e6);
  const ModeOperators ops(p);
  const Matrix number = ops.nb + ops.na;
  Matrix rho0 = 0.5 * basis_state(p, 1, 1) + 0.5 * basis_state(p, 0, 2);
  IntegratorOptions opts;
  opts.keep_snapshots = true;
  const Trajectory tr = lindblad_evolve(rho0, p, {p.detuning(), QubitRate::Swap, {}}, linspace(0, 300e-9, 31), opts);
  for (const Matrix& rho : tr.snapshots) {
    EXPECT_NEAR((number * rho).trace().real(), 2.0, 1e-9);
  }
}

TEST(DynamicsTest, RejectsInvalidDensityMatrix) {
  const SystemParams p = lossless(1e6, 0.0);
  Matrix rho = basis_state(p, 0, 0) * 2.0;
  const std::vector<double> t = {0.0, 1e-9};
  EXPECT_THROW(lindblad_evolve(rho, p, {}, t), InvalidInput);
  rho = basis_state(p, 0, 0);
  rho(0, 1) = 0.3;
  EXPECT_THROW(lindblad_evolve(rho, p, {}, t), InvalidInput);
}

TEST(DynamicsTest, FixedStepAgreesWithAdaptive) {
  SystemParams p = device_params();
  const auto t = linspace(0, 60e-9, 7);
  IntegratorOptions fixed;
  fixed.method = IntegratorOptions::Method::FixedRK4;
  const auto a = lindblad_evolve(basis_state(p, 1, 0), p, {0.0, QubitRate::Swap, {}}, t);
  const auto b = lindblad_evolve(basis_state(p, 1, 0), p, {0.0, QubitRate::Swap, {}}, t, fixed);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(a.p_e[i], b.p_e[i], 1e-7);
}

TEST(DynamicsTest, SequenceValidation) {
  EXPECT_THROW(PulseSequence{{XGate{}}}.validate(), InvalidInput);
  EXPECT_THROW((PulseSequence{{Readout{}, XGate{}, Readout{}}}.validate()), InvalidInput);
  EXPECT_THROW((PulseSequence{{Idle{-1.0, 0.0}, Readout{}}}.validate()), InvalidInput);
  EXPECT_NO_THROW((PulseSequence{{XGate{}, Readout{}}}.validate()));
}

TEST(DynamicsTest, GatesActOnQubit) {
  const SystemParams p = device_params();
  const auto x = run_sequence({{XGate{}, Readout{}}}, p);
  EXPECT_NEAR(*x.readout, 1.0, 1e-12);
  const auto half = run_sequence({{HalfXGate{}, Readout{}}}, p);
  EXPECT_NEAR(*half.readout, 0.5, 1e-12);
  const auto back = run_sequence({{HalfXGate{0.0}, HalfXGate{kPi}, Readout{}}}, p);
  EXPECT_NEAR(*back.readout, 0.0, 1e-12);
}

TEST(DynamicsTest, ZeroDelayDoubleSwapReturnsExcitation) {
  SystemParams p = device_params();
  const double ts = swap_duration(p);
  const auto tr = run_sequence(t1s_sequence(p, 0.0, ts), p);
  EXPECT_GT(*tr.readout, 0.6);
  EXPECT_LT(*tr.readout, 1.0);
  SystemParams ideal = lossless(6.672e6, 300e6, 3);
  const auto clean = run_sequence(t1s_sequence(ideal, 0.0, ts), ideal);
  EXPECT_NEAR(*clean.readout, 1.0, 1e-6);
}

TEST(DynamicsTest, TruncationConverged) {
  const SystemParams p = device_params();
  const double ts = swap_duration(p);
  EXPECT_LT(truncation_error(t1s_sequence(p, 200e-9, ts), p), 1e-6);
  EXPECT_LT(truncation_error(t2s_sequence(p, 200e-9, ts, hz_to_rad(10e6)), p), 1e-6);
}

TEST(DynamicsTest, T1sSweepRecoversPhononLifetime) {
  const SystemParams p = device_params();
  const double ts = swap_duration(p);
  const auto delays = linspace(0, 1e-6, 41);
  std::vector<double> pe;
  for (double d : delays) pe.push_back(*run_sequence(t1s_sequence(p, d, ts), p).readout);
  const auto fit = fit::nlls_fit(delays, pe, {fit::ModelKind::ExpDecay, std::nullopt});
  EXPECT_NEAR(1.0 / fit[1], 205e-9, 0.02 * 205e-9);
}

TEST(DynamicsTest, RamseyEnvelopeFollowsCoherenceDecay) {
  SystemParams p = device_params();
  p.gamma_phi_S = 1.0 / 800e-9;
  const double ts = swap_duration(p);
  const double ramsey = hz_to_rad(15e6);
  const auto delays = linspace(0, 600e-9, 121);
  std::vector<double> pe;
  for (double d : delays) pe.push_back(*run_sequence(t2s_sequence(p, d, ts, ramsey), p).readout);
  const auto est = fit::extract_oscillation_frequency(delays, pe);
  const double expected_rate = p.gamma_S / 2 + p.gamma_phi_S;
  EXPECT_NEAR(est.fit[3], expected_rate, 0.03 * expected_rate);
}

TEST(DynamicsTest, ChevronFollowsGeneralizedRabiLaw) {
  const SystemParams p = lossless(20.6e6, 0.0, 3);
  std::vector<double> det;
  for (double k : {-5.0, -2.0, 0.0, 1.0, 3.0, 5.0}) det.push_back(k * p.g_c);
  const auto t = linspace(0, 200e-9, 401);
  const ChevronMap map = vacuum_rabi_chevron(p, det, t);
  for (std::size_t i = 0; i < det.size(); ++i) {
    std::vector<double> row(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) row[j] = map.p_e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const double f = fit::extract_oscillation_frequency(t, row).frequency;
    const double expected = rad_to_hz(std::sqrt(det[i] * det[i] + 4 * p.g_c * p.g_c));
    EXPECT_NEAR(f, expected, 0.01 * expected) << i;
  }
}

TEST(DynamicsTest, DispersiveChiArithmetic) {
  const double chi = dispersive_chi(hz_to_rad(10e6), hz_to_rad(-300e6), hz_to_rad(-180e6));
  EXPECT_NEAR(rad_to_hz(chi), -0.125e6, 1.0);
  EXPECT_THROW(dispersive_chi(1.0, 0.0, -1.0), ZeroDetuning);
}

TEST(DynamicsTest, DressedShiftMatchesDispersiveFormula) {
  for (auto [ratio, tol] : {std::pair{0.1, 0.05}, std::pair{0.05, 0.05}, std::pair{0.03, 0.01}}) {
    SystemParams p = lossless(ratio * 300e6, -300e6, 3);
    const double chi = dispersive_chi(p.g_c, p.detuning(), p.eta);
    EXPECT_NEAR(dressed_shift(p, 1), 2 * chi, tol * std::abs(2 * chi)) << ratio;
  }
}

TEST(DynamicsTest, StarkScanSlopeScalesWithCouplingSquared) {
  std::vector<double> amps;
  for (double n : linspace(0, 5, 11)) amps.push_back(std::sqrt(n) * 0.5 / 205e-9);
  std::vector<fit::StarkScan> scans;
  for (double g : {10.3e6, 20.6e6}) {
    SystemParams p = lossless(g, -300e6, 3);
    p.gamma_S = 1.0 / 205e-9;
    const auto pts = stark_scan(p, amps);
    EXPECT_DOUBLE_EQ(pts[0].n_mean, 0.0);
    EXPECT_DOUBLE_EQ(pts[0].shift, 0.0);
    fit::StarkScan s{p.g_c, {}};
    for (const auto& pt : pts) s.points.emplace_back(pt.n_mean, pt.shift);
    scans.push_back(s);
    const double chi = dispersive_chi(p.g_c, p.detuning(), p.eta);
    for (const auto& pt : pts) {
      if (pt.n_mean > 0.5) EXPECT_NEAR(pt.shift / (2 * chi), pt.n_mean, 0.05 * pt.n_mean);
    }
  }
  const auto report = fit::stark_slope_analysis(scans);
  EXPECT_NEAR(report.per_scan[1].slope / report.per_scan[0].slope, 4.0, 0.2);
}

TEST(DynamicsTest, StarkScanWarnsOutsideDispersiveRegime) {
  std::vector<std::string> seen;
  set_warning_handler([&](const std::string& m) { seen.push_back(m); });
  const SystemParams p = lossless(60e6, -300e6, 3);
  const std::vector<double> amps = {0.0};
  stark_scan(p, amps);
  set_warning_handler(nullptr);
  EXPECT_EQ(seen.size(), 1u);
}

TEST(DynamicsTest, PurcellAndQuality) {
  SystemParams p = device_params();
  const double rate = purcell_rate(p);
  EXPECT_NEAR(rate, 1.1e3, 0.05e3);
  EXPECT_NEAR(rate / p.gamma_S, 2.3e-4, 0.1e-4);
  p.g_c *= 2;
  EXPECT_NEAR(purcell_rate(p), 4 * rate, 1e-9 * rate);
  p.g_c = 0;
  EXPECT_EQ(purcell_rate(p), 0.0);
  p.omega_q = p.omega0p;
  EXPECT_THROW(purcell_rate(p), ZeroDetuning);
  EXPECT_NEAR(quality_factor(hz_to_rad(3.901e9), 205e-9), 5025, 1);
}

TEST(DynamicsTest, PureDephasingRate) {
  EXPECT_NEAR(pure_dephasing_rate(1e-6, 1e-6), 0.5e6, 1e-6);
  std::vector<std::string> seen;
  set_warning_handler([&](const std::string& m) { seen.push_back(m); });
  EXPECT_EQ(pure_dephasing_rate(1e-6, 3e-6), 0.0);
  set_warning_handler(nullptr);
  EXPECT_EQ(seen.size(), 1u);
}

}  // namespace
}  // namespace qad::dyn
