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
#include <string>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"

namespace qad::circuit {
namespace {

constexpr double kCosGuard = 1e-6;
constexpr double kPoleGuard = 1e-3;

CouplingLedger with_delta(CouplingLedger ledger, double delta) {
  ledger.gmon.delta = delta;
  return ledger;
}

// g(delta) with poles mapped to NaN, for root bracketing.
double coupling_or_nan(const CouplingLedger& ledger, double delta) {
  try {
    return coupling_strength(with_delta(ledger, delta));
  } catch (const NumericalError&) {
    return std::nan("");
  }
}

}  // namespace

double TransmonParams::josephson_energy() const {
  return max_josephson_energy * std::abs(std::cos(kPi * flux_ratio));
}

void TransmonParams::validate() const {
  if (!(charging_energy > 0)) throw InvalidInput("transmon: E_c must be > 0");
  if (!(max_josephson_energy > 0)) throw InvalidInput("transmon: E_j0 must be > 0");
  if (max_josephson_energy / charging_energy <= 20.0) {
    warn(fmt::format("transmon: E_j0/E_c = {:.1f} is outside the transmon regime (> 20)",
                     max_josephson_energy / charging_energy));
  }
}

void GmonParams::validate() const {
  if (!(l_g > 0 && l_f > 0 && l_c0 > 0)) throw InvalidInput("gmon: inductances must be > 0");
}

void CouplingLedger::validate() const {
  if (!(l_j > 0)) throw InvalidInput("coupling ledger: L_J must be > 0");
  if (!(l_s > 0)) throw InvalidInput("coupling ledger: L_s must be > 0");
  if (!(omega0p > 0)) throw InvalidInput("coupling ledger: omega0' must be > 0");
  gmon.validate();
}

CouplingLedger reference_ledger() {
  CouplingLedger l;
  l.omega0p = hz_to_rad(3.901e9);
  return l;
}

double ec_from_capacitance(double capacitance) {
  if (!(capacitance > 0)) throw InvalidInput("ec_from_capacitance: C_p must be > 0");
  return kElementaryCharge * kElementaryCharge / (2.0 * capacitance * kPlanck);
}

double transmon_frequency(const TransmonParams& p) {
  p.validate();
  const double c = std::abs(std::cos(kPi * p.flux_ratio));
  if (c < 0.01) warn("transmon_frequency: flux within 1% of the cosine zero");
  return std::sqrt(8.0 * p.charging_energy * p.max_josephson_energy * c) - p.charging_energy;
}

double josephson_inductance(double josephson_energy_hz) {
  if (!(josephson_energy_hz > 0)) throw InvalidInput("josephson_inductance: E_J must be > 0");
  const double reduced = kFluxQuantum / kTwoPi;
  return reduced * reduced / (kPlanck * josephson_energy_hz);
}

double gmon_lc(const GmonParams& g) {
  g.validate();
  const double c = std::cos(g.delta);
  if (std::abs(c) <= kCosGuard) {
    throw PhasePole(fmt::format("gmon_lc: |cos(delta)| <= {} at delta = {}", kCosGuard, g.delta));
  }
  return g.l_c0 / c;
}

double coupling_strength(const CouplingLedger& ledger) {
  ledger.validate();
  const auto& gm = ledger.gmon;
  const double l_c = gmon_lc(gm);
  const double loop = gm.l_g + gm.l_f + l_c;
  if (std::abs(loop) < kPoleGuard * (gm.l_g + gm.l_f)) {
    throw CouplingPole(fmt::format("coupling_strength: L_g + L_f + L_c = {:.3e} H", loop));
  }
  const double participation = 1.0 / std::sqrt((ledger.l_j + gm.l_g) * (ledger.l_s + gm.l_f));
  return 0.5 * participation * (gm.l_g * gm.l_f / loop) * ledger.omega0p;
}

double solve_delta_for_g(double target_g, const CouplingLedger& ledger) {
  ledger.validate();
  const auto& gm = ledger.gmon;
  // Zero coupling lives only at the L_c asymptote delta -> pi/2.
  if (std::abs(target_g) < 1e-6 * ledger.omega0p) {
    const double edge = std::acos(kCosGuard) - 1e-12;
    const double g_edge = coupling_or_nan(ledger, edge);
    if (std::isfinite(g_edge) && std::abs(g_edge - target_g) < 1e-6 * ledger.omega0p) return edge;
    throw Unreachable("solve_delta_for_g: zero coupling is only reached asymptotically");
  }

  // Pole where L_c = -(L_g + L_f); exists when L_c0 < L_g + L_f.
  std::vector<std::pair<double, double>> branches;
  const double half_pi_hi = std::acos(-kCosGuard) + 1e-12;
  branches.emplace_back(0.0, std::acos(kCosGuard) - 1e-12);
  const double ratio = -gm.l_c0 / (gm.l_g + gm.l_f);
  if (ratio > -1.0) {
    const double pole = std::acos(ratio);
    // Guard band: |L_g + L_f + L_c| >= 1e-3 (L_g + L_f) on both sides.
    const double lc_near = -(gm.l_g + gm.l_f) * (1.0 + 2.0 * kPoleGuard);
    const double lc_far = -(gm.l_g + gm.l_f) * (1.0 - 2.0 * kPoleGuard);
    const double d_near = std::acos(gm.l_c0 / lc_near);
    const double d_far = std::acos(gm.l_c0 / lc_far);
    branches.emplace_back(half_pi_hi, std::min(d_near, pole));
    branches.emplace_back(std::max(d_far, pole), kPi);
  } else {
    branches.emplace_back(half_pi_hi, kPi);
  }

  for (const auto& [lo, hi] : branches) {
    const double g_lo = coupling_or_nan(ledger, lo);
    const double g_hi = coupling_or_nan(ledger, hi);
    if (!std::isfinite(g_lo) || !std::isfinite(g_hi)) continue;
    const double f_lo = g_lo - target_g, f_hi = g_hi - target_g;
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0) == (f_hi > 0)) continue;
    auto residual = [&](double d) { return coupling_strength(with_delta(ledger, d)) - target_g; };
    auto tol = [&](double a, double b) {
      return std::abs(b - a) < 1e-15 ||
             std::abs(residual(0.5 * (a + b))) < 1e-9 * std::abs(target_g);
    };
    std::uintmax_t iters = 500;
    const auto [a, b] = boost::math::tools::toms748_solve(residual, lo, hi, f_lo, f_hi, tol, iters);
    const double delta = 0.5 * (a + b);
    if (std::abs(residual(delta)) <= 1e-6 * std::abs(target_g)) return delta;
  }
  throw Unreachable(fmt::format("solve_delta_for_g: no branch reaches g/2pi = {:.4f} MHz",
                                rad_to_hz(target_g) / 1e6));
}

double gmon_delta_from_bias(double phi_bias, double loop_beta) {
  if (!(loop_beta >= 0)) throw InvalidInput("gmon_delta_from_bias: loop beta must be >= 0");
  auto f = [&](double d) { return d + loop_beta * std::sin(d) - phi_bias; };
  if (phi_bias == 0.0) return 0.0;

  // Bracket on a branch where f is monotone increasing.
  double lo, hi;
  if (loop_beta < 1.0) {
    // |delta - phi| <= beta.
    lo = phi_bias - loop_beta - 1e-12;
    hi = phi_bias + loop_beta + 1e-12;
  } else {
    const double critical = std::acos(-1.0 / loop_beta);
    const double reach = critical + loop_beta * std::sin(critical);
    long k = 0;
    if (std::abs(phi_bias) >= reach) {
      k = std::lround(phi_bias / kTwoPi);
      while (std::abs(phi_bias - kTwoPi * k) >= reach) k += (phi_bias > kTwoPi * k) ? 1 : -1;
    }
    lo = kTwoPi * k - critical;
    hi = kTwoPi * k + critical;
  }

  // Safeguarded Newton: fall back to bisection when a step leaves the bracket.
  double d = std::clamp(phi_bias / (1.0 + loop_beta), lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double val = f(d);
    if (std::abs(val) < 1e-14 * std::max(1.0, std::abs(phi_bias))) return d;
    if (val > 0) hi = d; else lo = d;
    const double deriv = 1.0 + loop_beta * std::cos(d);
    double next = deriv > 0 ? d - val / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - d) < 1e-16 * std::max(1.0, std::abs(d))) return next;
    d = next;
  }
  return d;
}

std::vector<CouplingPoint> coupling_bias_curve(std::span<const double> bias_grid,
                                               const CouplingLedger& ledger,
                                               std::optional<double> loop_beta) {
  if (bias_grid.empty()) throw InvalidInput("coupling_bias_curve: empty bias grid");
  const double beta = loop_beta.value_or(ledger.gmon.loop_beta());
  std::vector<CouplingPoint> out;
  out.reserve(bias_grid.size());
  for (double bias : bias_grid) {
    CouplingPoint pt;
    pt.bias = bias;
    pt.delta = gmon_delta_from_bias(bias, beta);
    try {
      pt.coupling = coupling_strength(with_delta(ledger, pt.delta));
    } catch (const NumericalError&) {
      pt.coupling.reset();
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace qad::circuit
