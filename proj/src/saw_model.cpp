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

#include "qad/saw_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"
#include "qad/fitkit.hpp"

namespace qad::saw {
namespace {

constexpr complex kJ{0.0, 1.0};

// Normalized IDT detuning X = N_t pi (f - f0) / f0.
double idt_detuning(double f, const SawGeometry& geom) {
  const double f0 = geometry_to_f0(geom);
  return geom.idt_cells * kPi * (f - f0) / f0;
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Fornberg finite-difference weights for the first derivative at z.
std::vector<double> first_derivative_weights(double z, std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(2, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
  return w;
}

}  // namespace

SawGeometry SawGeometry::from_electrode_width(double width) {
  SawGeometry g;
  g.electrode_width = width;
  g.pitch = 4.0 * width;
  return g;
}

void SawGeometry::validate() const {
  if (!(electrode_width > 0)) throw InvalidInput("saw geometry: electrode width must be > 0");
  if (!(pitch > 0)) throw InvalidInput("saw geometry: pitch must be > 0");
  if (idt_cells < 1) throw InvalidInput("saw geometry: IDT cell count must be >= 1");
  if (mirror_cells < 0) throw InvalidInput("saw geometry: mirror cell count must be >= 0");
  if (!(velocity > 0)) throw InvalidInput("saw geometry: velocity must be > 0");
  if (!(std::abs(electrode_reflection) < 1.0)) {
    throw InvalidInput("saw geometry: |electrode reflection| must be < 1");
  }
  if (!(coupling_k2 > 0 && coupling_k2 < 1)) throw InvalidInput("saw geometry: K2 must be in (0, 1)");
  if (!(static_capacitance > 0)) throw InvalidInput("saw geometry: C_t must be > 0");
  if (peak_conductance && !(*peak_conductance > 0)) {
    throw InvalidInput("saw geometry: peak conductance override must be > 0");
  }
}

BvdParams BvdParams::from_motional(double l_s, double c_s, double r_s, double c_t) {
  BvdParams p{l_s, c_s, r_s, c_t, 0.0, 0.0};
  p.resonance = 1.0 / (kTwoPi * std::sqrt(l_s * c_s));
  p.quality = p.characteristic_impedance() / r_s;
  p.validate();
  return p;
}

BvdParams BvdParams::from_resonance(double l_s, double r_s, double c_t, double f0) {
  const double w0 = kTwoPi * f0;
  BvdParams p{l_s, 1.0 / (w0 * w0 * l_s), r_s, c_t, f0, 0.0};
  p.quality = p.characteristic_impedance() / r_s;
  p.validate();
  return p;
}

BvdParams BvdParams::from_quality(double l_s, double c_s, double q, double c_t) {
  BvdParams p{l_s, c_s, 0.0, c_t, 0.0, q};
  p.resonance = 1.0 / (kTwoPi * std::sqrt(l_s * c_s));
  p.resistance = p.characteristic_impedance() / q;
  p.validate();
  return p;
}

double BvdParams::characteristic_impedance() const { return std::sqrt(inductance / capacitance); }

void BvdParams::validate() const {
  if (!(inductance > 0 && capacitance > 0 && resistance > 0 && static_capacitance > 0 &&
        resonance > 0 && quality > 0)) {
    throw InvalidInput("bvd: all parameters must be strictly positive");
  }
  const double f_lc = 1.0 / (kTwoPi * std::sqrt(inductance * capacitance));
  if (std::abs(resonance - f_lc) / resonance >= 1e-6) {
    throw InvalidInput("bvd: f0 inconsistent with 1/(2 pi sqrt(L_s C_s))");
  }
  const double r_expected = characteristic_impedance() / quality;
  if (std::abs(resistance - r_expected) / resistance >= 1e-6) {
    throw InvalidInput("bvd: R_s inconsistent with Z_s / Q");
  }
}

void FrequencyTrace::validate() const {
  if (frequencies.size() != values.size()) throw InvalidInput("trace: length mismatch");
  for (std::size_t i = 1; i < frequencies.size(); ++i) {
    if (!(frequencies[i] > frequencies[i - 1])) {
      throw InvalidInput("trace: frequencies must be strictly increasing");
    }
  }
}

double geometry_to_f0(const SawGeometry& geom) { return geom.velocity / geom.pitch; }

double peak_conductance(const SawGeometry& geom) {
  if (geom.peak_conductance) return *geom.peak_conductance;
  return 8.0 * geom.coupling_k2 * geometry_to_f0(geom) * geom.static_capacitance * geom.idt_cells;
}

double idt_conductance(double f, const SawGeometry& geom) {
  const double x = idt_detuning(f, geom);
  if (std::abs(x) < 1e-8) return peak_conductance(geom) * (1.0 - x * x / 3.0);
  const double s = std::sin(x) / x;
  return peak_conductance(geom) * s * s;
}

double idt_susceptance(double f, const SawGeometry& geom) {
  const double x = idt_detuning(f, geom);
  // (sin 2X - 2X) / (2X^2) ~ -2X/3 + 4X^3/15 near the centre.
  if (std::abs(x) < 1e-4) return peak_conductance(geom) * (-2.0 * x / 3.0 + 4.0 * x * x * x / 15.0);
  return peak_conductance(geom) * (std::sin(2.0 * x) - 2.0 * x) / (2.0 * x * x);
}

double idt_bandwidth(const SawGeometry& geom) {
  const double f0 = geometry_to_f0(geom);
  const double half = 0.5 * peak_conductance(geom);
  auto h = [&](double f) { return idt_conductance(f, geom) - half; };
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 200;
  // First null at X = pi.
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      h, f0 * (1.0 + 1e-9), f0 * (1.0 + 1.0 / geom.idt_cells), tol, iters);
  return 2.0 * (0.5 * (lo + hi) - f0);
}

Eigen::Matrix2cd mirror_cell_matrix(double f, const SawGeometry& geom) {
  const complex r = geom.electrode_reflection;
  const double mag = std::abs(r);
  const double phase = mag > 0 ? std::arg(r) : kPi / 2;
  const complex t = -kJ * std::sqrt(1.0 - mag * mag) * std::exp(kJ * phase);
  Eigen::Matrix2cd refl;
  refl << 1.0, -r, r, t * t - r * r;
  refl /= t;
  const double cell = 0.5 * geom.pitch;
  const double half_phase = 0.5 * kTwoPi * f * cell / geom.velocity;
  Eigen::Matrix2cd prop = Eigen::Matrix2cd::Zero();
  prop(0, 0) = std::exp(kJ * half_phase);
  prop(1, 1) = std::exp(-kJ * half_phase);
  return prop * refl * prop;
}

complex mirror_reflection(double f, const SawGeometry& geom) {
  if (geom.mirror_cells <= 0) return 0.0;
  Eigen::Matrix2cd base = mirror_cell_matrix(f, geom);
  Eigen::Matrix2cd total = Eigen::Matrix2cd::Identity();
  for (int n = geom.mirror_cells; n > 0; n >>= 1) {
    if (n & 1) total = total * base;
    base = base * base;
  }
  return total(1, 0) / total(0, 0);
}

double mirror_stopband(const SawGeometry& geom, double f_lo, double f_hi, std::size_t n,
                       double fraction) {
  if (n < 3 || !(f_hi > f_lo)) throw InvalidInput("mirror_stopband: need >= 3 points on a range");
  const auto f = linspace(f_lo, f_hi, n);
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(mirror_reflection(f[i], geom));
  const auto k = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
  const double level = fraction * mag[k];
  std::size_t lo = k, hi = k;
  while (lo > 0 && mag[lo - 1] > level) --lo;
  while (hi + 1 < n && mag[hi + 1] > level) ++hi;
  auto cross = [&](std::size_t in, std::size_t out) {
    const double t = (mag[in] - level) / (mag[in] - mag[out]);
    return f[in] + t * (f[out] - f[in]);
  };
  const double left = lo > 0 ? cross(lo, lo - 1) : f.front();
  const double right = hi + 1 < n ? cross(hi, hi + 1) : f.back();
  return right - left;
}

complex bvd_impedance(double omega, const BvdParams& p) {
  const complex z_motional =
      p.resistance + kJ * omega * p.inductance + 1.0 / (kJ * omega * p.capacitance);
  const complex y = kJ * omega * p.static_capacitance + 1.0 / z_motional;
  return 1.0 / y;
}

complex s11_from_impedance(complex z, double z0) {
  if (!(z0 > 0)) throw InvalidInput("s11: reference impedance must be > 0");
  if (std::isinf(z.real()) || std::isinf(z.imag())) return 1.0;
  return (z - z0) / (z + z0);
}

complex impedance_from_s11(complex s11, double z0) { return z0 * (1.0 + s11) / (1.0 - s11); }

FrequencyTrace synthesize_s11(const BvdParams& params, std::span<const double> frequencies,
                              double z0, double noise_sigma, std::uint64_t seed) {
  FrequencyTrace trace;
  trace.frequencies.assign(frequencies.begin(), frequencies.end());
  trace.values.reserve(frequencies.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);
  for (double f : frequencies) {
    complex s = s11_from_impedance(bvd_impedance(kTwoPi * f, params), z0);
    if (noise_sigma > 0) s += complex(noise(rng), noise(rng));
    trace.values.push_back(s);
  }
  trace.validate();
  return trace;
}

std::vector<double> resonance_grid(const BvdParams& params, std::size_t n, double half_widths) {
  const double w = half_widths * params.linewidth();
  return linspace(params.resonance - w, params.resonance + w, n);
}

BvdExtraction bvd_extract_detailed(const FrequencyTrace& trace, double z0) {
  trace.validate();
  const std::size_t n = trace.size();
  if (n < 5) {
    throw GridTooCoarse("bvd_extract: " + std::to_string(n) + " points cannot resolve a resonance");
  }
  if (!(z0 > 0)) throw InvalidInput("bvd_extract: reference impedance must be > 0");

  BvdExtraction out;
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(trace.values[i]);
  // Noise floor: two sigma of white noise, estimated from second differences.
  std::vector<double> d2;
  for (std::size_t i = 1; i + 1 < n; ++i) d2.push_back(mag[i + 1] - 2.0 * mag[i] + mag[i - 1]);
  const double med = median(d2);
  for (auto& v : d2) v = std::abs(v - med);
  const double sigma = 1.4826 * median(d2) / std::sqrt(6.0);
  out.noise_floor = std::max(2.0 * sigma, 1e-12);
  out.dip_depth = median(mag) - *std::min_element(mag.begin(), mag.end());
  if (out.dip_depth <= 3.0 * out.noise_floor) {
    throw NoResonanceFound("bvd_extract: |S11| dip does not exceed 3x the noise floor");
  }

  std::vector<double> omega(n);
  std::vector<complex> admittance(n);
  for (std::size_t i = 0; i < n; ++i) {
    omega[i] = kTwoPi * trace.frequencies[i];
    const complex s = trace.values[i];
    admittance[i] = (1.0 - s) / (z0 * (1.0 + s));
  }
  double c_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) c_t += admittance[i].imag() / omega[i];
  c_t /= static_cast<double>(n);

  std::optional<std::vector<double>> lorentz_guess;
  BvdParams p;
  std::vector<double> ym2(n);
  std::vector<complex> zm(n);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const complex ym = admittance[i] - kJ * omega[i] * c_t;
      ym2[i] = std::norm(ym);
      zm[i] = 1.0 / ym;
    }
    const double scale = *std::max_element(ym2.begin(), ym2.end());
    for (auto& v : ym2) v /= scale;
    const fit::FitResult lor =
        fit::nlls_fit(trace.frequencies, ym2, fit::ModelSpec{fit::ModelKind::Lorentzian, lorentz_guess});
    lorentz_guess = lor.params;
    const double f0 = lor.params[0];
    const double fwhm = std::abs(lor.params[1]);
    if (!(f0 > trace.frequencies.front() && f0 < trace.frequencies.back()) || !(fwhm > 0)) {
      throw NoResonanceFound("bvd_extract: resonance fit left the trace");
    }

    // Motional reactance X = omega L - 1/(omega C) regressed over the points
    // within one linewidth of omega0; a five-point stencil when too few.
    const double w0 = kTwoPi * f0;
    Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
    Eigen::Vector2d atb = Eigen::Vector2d::Zero();
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(trace.frequencies[i] - f0) > fwhm) continue;
      const Eigen::Vector2d row(omega[i] / w0, -w0 / omega[i]);
      ata += row * row.transpose();
      atb += row * (zm[i].imag() / w0);
      ++used;
    }
    double l_s = 0.0;
    if (used >= 5) {
      l_s = ata.ldlt().solve(atb)(0);
    } else {
      const auto it = std::lower_bound(omega.begin(), omega.end(), w0);
      std::size_t k = static_cast<std::size_t>(it - omega.begin());
      if (k > 0 && (k == n || std::abs(omega[k - 1] - w0) < std::abs(omega[k] - w0))) --k;
      const std::size_t start = std::clamp<std::size_t>(k < 2 ? 0 : k - 2, 0, n - 5);
      const auto w = first_derivative_weights(omega[k], std::span(omega).subspan(start, 5));
      double slope = 0.0;
      for (std::size_t j = 0; j < 5; ++j) slope += w[j] * zm[start + j].imag();
      l_s = 0.5 * slope;
    }
    if (!(l_s > 0)) throw NoResonanceFound("bvd_extract: reactance slope is not inductive");

    const double q = f0 / fwhm;
    const double c_s = 1.0 / (w0 * w0 * l_s);
    p = BvdParams{l_s, c_s, std::sqrt(l_s / c_s) / q, c_t, f0, q};

    double c_next = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const complex zmod = p.resistance + kJ * omega[i] * l_s + 1.0 / (kJ * omega[i] * c_s);
      c_next += (admittance[i].imag() - (1.0 / zmod).imag()) / omega[i];
    }
    c_next /= static_cast<double>(n);
    const bool settled = std::abs(c_next - c_t) <= 1e-12 * std::abs(c_t);
    c_t = c_next;
    p.static_capacitance = c_t;
    if (settled) break;
  }
  if (!(c_t > 0)) throw NoResonanceFound("bvd_extract: static capacitance estimate is not positive");

  out.params = p;
  out.static_capacitance_estimate = c_t;
  const double lo = p.resonance - 0.5 * p.linewidth(), hi = p.resonance + 0.5 * p.linewidth();
  out.points_in_linewidth = static_cast<std::size_t>(std::count_if(
      trace.frequencies.begin(), trace.frequencies.end(), [&](double f) { return f >= lo && f <= hi; }));
  if (out.points_in_linewidth < 50) {
    throw GridTooCoarse("bvd_extract: only " + std::to_string(out.points_in_linewidth) +
                        " points inside the linewidth (need 50)");
  }
  return out;
}

BvdParams bvd_extract(const FrequencyTrace& trace, double z0) {
  return bvd_extract_detailed(trace, z0).params;
}

}  // namespace qad::saw
