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

#include "qad/circuit_model.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"

namespace qad::circuit {
namespace {

// Lowest transition of the Cooper-pair-box Hamiltonian
// 4 E_c (n - n_g)^2 - (E_J / 2) (|n><n+1| + h.c.) in the charge basis.
double charge_basis_transition(double ec, double ej, int n_cut = 30) {
  const int dim = 2 * n_cut + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double n = i - n_cut;
    h(i, i) = 4.0 * ec * n * n;
    if (i + 1 < dim) h(i, i + 1) = h(i + 1, i) = -0.5 * ej;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(1) - es.eigenvalues()(0);
}

// Reference coupling built from the inductive divider without shared code.
double reference_coupling(double delta) {
  const double lg = 475e-12, lf = 523e-12, lc = 645e-12 / std::cos(delta);
  const double lj = 10e-9, ls = 186e-9, w = kTwoPi * 3.901e9;
  const double mutual = lg * lf / (lg + lf + lc);
  return 0.5 * mutual / std::sqrt((lj + lg) * (ls + lf)) * w;
}

TEST(CircuitModelTest, ChargingEnergyFromCapacitance) {
  EXPECT_NEAR(ec_from_capacitance(108e-15), 0.179e9, 0.002e9);
  EXPECT_THROW(ec_from_capacitance(0.0), InvalidInput);
}

TEST(CircuitModelTest, TransmonFrequencyMatchesChargeBasis) {
  TransmonParams p;
  for (double flux : {0.0, 0.1, 0.2, 0.3}) {
    p.flux_ratio = flux;
    const double ej = p.josephson_energy();
    const double exact = charge_basis_transition(p.charging_energy, ej);
    EXPECT_NEAR(transmon_frequency(p), exact, exact * p.charging_energy / ej) << flux;
  }
}

TEST(CircuitModelTest, TransmonFrequencyAtSweetSpot) {
  const TransmonParams p;
  EXPECT_NEAR(transmon_frequency(p), std::sqrt(8 * 0.18e9 * 22.5e9) - 0.18e9, 1.0);
}

TEST(CircuitModelTest, WarnsOutsideTransmonRegime) {
  std::vector<std::string> seen;
  set_warning_handler([&](const std::string& m) { seen.push_back(m); });
  TransmonParams p;
  p.max_josephson_energy = 10 * p.charging_energy;
  p.validate();
  set_warning_handler(nullptr);
  EXPECT_FALSE(seen.empty());
}

TEST(CircuitModelTest, CouplingAtZeroPhase) {
  const CouplingLedger ledger = reference_ledger();
  const double g = coupling_strength(ledger);
  EXPECT_NEAR(rad_to_hz(g), 6.672e6, 0.01e6);
  EXPECT_NEAR(g, reference_coupling(0.0), 1e-9 * g);
}

TEST(CircuitModelTest, CouplingMatchesReferenceOverPhase) {
  CouplingLedger ledger = reference_ledger();
  for (double d : {-1.2, -0.4, 0.3, 1.0, 2.0, 2.8, 3.1}) {
    ledger.gmon.delta = d;
    EXPECT_NEAR(coupling_strength(ledger), reference_coupling(d), 1e-9 * std::abs(reference_coupling(d)));
  }
}

TEST(CircuitModelTest, CouplingIsLinearInSawFrequency) {
  CouplingLedger ledger = reference_ledger();
  ledger.gmon.delta = 0.7;
  const double g1 = coupling_strength(ledger);
  ledger.omega0p *= 2;
  EXPECT_NEAR(coupling_strength(ledger), 2 * g1, 1e-12 * std::abs(g1));
}

TEST(CircuitModelTest, PolesAreReported) {
  CouplingLedger ledger = reference_ledger();
  ledger.gmon.delta = kPi / 2;
  EXPECT_THROW(coupling_strength(ledger), PhasePole);
  const double gm = ledger.gmon.l_g + ledger.gmon.l_f;
  ledger.gmon.delta = std::acos(-ledger.gmon.l_c0 / gm);
  EXPECT_THROW(coupling_strength(ledger), CouplingPole);
}

TEST(CircuitModelTest, SolveForNegativeExtreme) {
  CouplingLedger ledger = reference_ledger();
  const double target = -hz_to_rad(20.6e6);
  const double delta = solve_delta_for_g(target, ledger);
  ledger.gmon.delta = delta;
  EXPECT_LT(std::abs(rad_to_hz(coupling_strength(ledger) - target)), 1e3);
  EXPECT_NEAR(delta, 2.0055, 2e-3);
}

TEST(CircuitModelTest, SolveRoundTripsOnPositiveBranch) {
  CouplingLedger ledger = reference_ledger();
  for (double d : {0.0, 0.3, 0.9, 1.3}) {
    ledger.gmon.delta = d;
    const double g = coupling_strength(ledger);
    EXPECT_NEAR(solve_delta_for_g(g, reference_ledger()), d, 1e-6);
  }
}

TEST(CircuitModelTest, ZeroCouplingSitsAtTheAsymptote) {
  CouplingLedger ledger = reference_ledger();
  ledger.gmon.delta = solve_delta_for_g(0.0, ledger);
  EXPECT_NEAR(ledger.gmon.delta, kPi / 2, 1e-5);
  EXPECT_LT(std::abs(rad_to_hz(coupling_strength(ledger))), 1e3);
}

TEST(CircuitModelTest, UnreachableTargets) {
  const CouplingLedger ledger = reference_ledger();
  EXPECT_THROW(solve_delta_for_g(hz_to_rad(10.0e6), ledger), Unreachable);
}

TEST(CircuitModelTest, RfSquidSolverMatchesBisection) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (double beta : {0.3, 0.9}) {
    for (int i = 0; i < 50; ++i) {
      const double phi = u(rng);
      double lo = -10.0, hi = 10.0;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (mid + beta * std::sin(mid) - phi > 0 ? hi : lo) = mid;
      }
      EXPECT_NEAR(gmon_delta_from_bias(phi, beta), 0.5 * (lo + hi), 1e-10);
    }
  }
}

TEST(CircuitModelTest, RfSquidHysteresisBranchSatisfiesLoopEquation) {
  const double beta = reference_ledger().gmon.loop_beta();
  for (double phi : linspace(-3.0, 3.0, 61)) {
    const double d = gmon_delta_from_bias(phi, beta);
    EXPECT_NEAR(d + beta * std::sin(d), phi, 1e-10);
    EXPECT_GT(1.0 + beta * std::cos(d), -1e-12);
  }
}

TEST(CircuitModelTest, BiasCurveFlagsPoleRows) {
  const CouplingLedger ledger = reference_ledger();
  // The junction-phase branch through zero ends where d(bias)/d(delta) = 0,
  // which for this loop coincides with the coupling pole.
  const double beta = ledger.gmon.loop_beta();
  const double critical = std::acos(-1.0 / beta);
  auto grid = linspace(-3.4, 3.4, 341);
  grid.push_back((critical + beta * std::sin(critical)) * (1 - 1e-12));
  const auto curve = coupling_bias_curve(grid, ledger);
  bool saw_empty = false;
  double gmin = 0, gmax = 0;
  for (const auto& pt : curve) {
    if (!pt.coupling) {
      saw_empty = true;
      continue;
    }
    gmin = std::min(gmin, *pt.coupling);
    gmax = std::max(gmax, *pt.coupling);
  }
  EXPECT_TRUE(saw_empty);
  EXPECT_NEAR(rad_to_hz(gmax), 6.672e6, 0.01e6);
  EXPECT_LT(rad_to_hz(gmin), -15e6);
  EXPECT_FALSE(curve.back().coupling.has_value());
  EXPECT_THROW(coupling_bias_curve({}, ledger), InvalidInput);
}

}  // namespace
}  // namespace qad::circuit
