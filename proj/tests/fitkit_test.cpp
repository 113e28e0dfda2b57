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

#include "qad/fitkit.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"

namespace qad::fit {
namespace {

std::vector<double> sample(ModelKind kind, const std::vector<double>& params,
                           const std::vector<double>& x, double noise = 0.0,
                           std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> y;
  for (double xi : x) y.push_back(evaluate(kind, params, xi) + noise * n(rng));
  return y;
}

TEST(FitkitTest, ModelNamesRoundTrip) {
  for (auto k : {ModelKind::Lorentzian, ModelKind::ExpDecay, ModelKind::DampedCosine, ModelKind::Line}) {
    EXPECT_EQ(model_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(model_kind_from_string("gaussian"), InvalidInput);
}

TEST(FitkitTest, NoiselessRoundTripsEveryModel) {
  struct Case {
    ModelKind kind;
    std::vector<double> truth;
    std::vector<double> x;
  };
  const std::vector<Case> cases = {
      {ModelKind::Lorentzian, {4.0e9, 2.5e6, 0.6, 1.0}, linspace(3.98e9, 4.02e9, 401)},
      {ModelKind::ExpDecay, {0.9, 1.0 / 205e-9, 0.02}, linspace(0, 1e-6, 101)},
      {ModelKind::DampedCosine, {0.5, 41.2e6, 0.3, 2e6, 0.5}, linspace(0, 200e-9, 201)},
      {ModelKind::Line, {-1.5, 0.25}, linspace(-2, 3, 11)},
  };
  for (const auto& c : cases) {
    const auto y = sample(c.kind, c.truth, c.x);
    const FitResult r = nlls_fit(c.x, y, {c.kind, std::nullopt});
    ASSERT_TRUE(r.converged) << to_string(c.kind);
    for (std::size_t i = 0; i < c.truth.size(); ++i) {
      EXPECT_NEAR(r[i], c.truth[i], 1e-6 * std::max(1.0, std::abs(c.truth[i])) + 1e-9)
          << to_string(c.kind) << " param " << i;
    }
  }
}

TEST(FitkitTest, NoisyDecayWithinThreeSigma) {
  const auto x = linspace(0, 1e-6, 201);
  const std::vector<double> truth = {1.0, 1.0 / 205e-9, 0.0};
  const auto y = sample(ModelKind::ExpDecay, truth, x, 0.01, 7);
  const FitResult r = nlls_fit(x, y, {ModelKind::ExpDecay, std::nullopt});
  EXPECT_LT(std::abs(r[1] - truth[1]), 3.0 * r.sigma[1]);
  EXPECT_GT(r.sigma[1], 0.0);
}

TEST(FitkitTest, SigmaScalesAsInverseSqrtOfPoints) {
  const std::vector<double> truth = {0.8, 5e6, 0.1};
  double sigma_small = 0, sigma_large = 0;
  const int trials = 20;
  for (int s = 0; s < trials; ++s) {
    const auto x1 = linspace(0, 1e-6, 100);
    const auto x2 = linspace(0, 1e-6, 400);
    sigma_small += nlls_fit(x1, sample(ModelKind::ExpDecay, truth, x1, 0.02, 100 + s),
                            {ModelKind::ExpDecay, std::nullopt}).sigma[1];
    sigma_large += nlls_fit(x2, sample(ModelKind::ExpDecay, truth, x2, 0.02, 200 + s),
                            {ModelKind::ExpDecay, std::nullopt}).sigma[1];
  }
  EXPECT_NEAR(sigma_small / sigma_large, 2.0, 0.2);
}

TEST(FitkitTest, CostHistoryIsMonotone) {
  const auto x = linspace(0, 200e-9, 201);
  const auto y = sample(ModelKind::DampedCosine, {0.5, 30e6, 0.0, 5e6, 0.5}, x, 0.01, 3);
  const FitResult r =
      nlls_fit(x, y, {ModelKind::DampedCosine, std::vector<double>{0.4, 28e6, 0.2, 3e6, 0.45}});
  ASSERT_GE(r.cost_history.size(), 2u);
  for (std::size_t i = 1; i < r.cost_history.size(); ++i) {
    EXPECT_LE(r.cost_history[i], r.cost_history[i - 1] * (1 + 1e-12));
  }
}

TEST(FitkitTest, RejectsBadInputs) {
  const std::vector<double> x = {0, 1};
  const std::vector<double> y = {1, 2};
  EXPECT_THROW(nlls_fit(x, y, {ModelKind::ExpDecay, std::nullopt}), InvalidInput);
  const std::vector<double> x3 = {0, 1, 2};
  const std::vector<double> y3 = {1, NAN, 2};
  EXPECT_THROW(nlls_fit(x3, y3, {ModelKind::Line, std::nullopt}), InvalidInput);
}

TEST(FitkitTest, DegenerateJacobianDetected) {
  // All x identical: the slope has no influence.
  const std::vector<double> x(10, 1.0);
  const std::vector<double> y(10, 2.0);
  EXPECT_THROW(nlls_fit(x, y, {ModelKind::Line, std::vector<double>{1.0, 1.0}}), DegenerateJacobian);
}

TEST(FitkitTest, OscillationFrequencyOfCosine) {
  const auto t = linspace(0, 300e-9, 301);
  std::vector<double> y;
  for (double ti : t) y.push_back(0.5 + 0.5 * std::cos(kTwoPi * 41.2e6 * ti));
  const auto est = extract_oscillation_frequency(t, y);
  EXPECT_NEAR(est.frequency, 41.2e6, 41.2e6 * 1e-6);
}

TEST(FitkitTest, FlatTraceHasNoOscillation) {
  const auto t = linspace(0, 300e-9, 301);
  std::vector<double> y;
  for (double ti : t) y.push_back(std::exp(-ti / 100e-9));
  EXPECT_THROW(extract_oscillation_frequency(t, y), NoOscillation);
}

TEST(FitkitTest, CrosstalkRecoveredAndAsymmetryRemoved) {
  const double alpha = 0.13;
  auto model = [](double phi) { return 5.5e9 * std::sqrt(std::abs(std::cos(kPi * phi))); };
  std::vector<SpectroscopyPoint> pts;
  for (double gb : linspace(-0.4, 0.4, 9)) {
    for (double qb : linspace(-0.3, 0.3, 61)) {
      pts.push_back({gb, qb, model(qb - alpha * gb)});
    }
  }
  const CrosstalkFit fit = fit_crosstalk(pts, model);
  EXPECT_NEAR(fit.alpha, alpha, 1e-4);
  const double before = spectroscopy_asymmetry(pts, 0.0);
  const double after = spectroscopy_asymmetry(pts, fit.alpha);
  EXPECT_GT(before, 10.0 * after);
}

TEST(FitkitTest, CrosstalkCorrectionSubtractsGmonBias) {
  const std::vector<BiasPair> in = {{1.0, 0.5}, {-2.0, 0.0}};
  const auto out = crosstalk_correct(in, 0.25);
  EXPECT_DOUBLE_EQ(out[0].qubit_bias, 0.25);
  EXPECT_DOUBLE_EQ(out[1].qubit_bias, 0.5);
}

TEST(FitkitTest, StarkSlopesScaleWithCouplingSquared) {
  std::vector<StarkScan> scans;
  for (double g : {1.0, 2.0}) {
    StarkScan s{g, {}};
    for (double n : {0.0, 1.0, 2.0, 3.0, 4.0}) s.points.emplace_back(n, -0.3 * g * g * n);
    scans.push_back(s);
  }
  const auto report = stark_slope_analysis(scans);
  EXPECT_NEAR(report.c, -0.3, 1e-12);
  EXPECT_NEAR(report.per_scan[1].slope / report.per_scan[0].slope, 4.0, 1e-9);
  EXPECT_NEAR(report.per_scan[0].relative_deviation, 0.0, 1e-9);
}

}  // namespace
}  // namespace qad::fit
