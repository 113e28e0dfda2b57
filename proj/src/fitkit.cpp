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

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"

namespace qad::fit {
namespace {

// Affine data normalization: u = (x - x0) / sx, v = (y - y0) / sy.
struct Scaling {
  double x0 = 0.0, sx = 1.0, y0 = 0.0, sy = 1.0;
};

Scaling make_scaling(std::span<const double> x, std::span<const double> y) {
  Scaling s;
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  s.x0 = *xmin;
  s.sx = (*xmax > *xmin) ? (*xmax - *xmin) : 1.0;
  s.y0 = *ymin;
  s.sy = (*ymax > *ymin) ? (*ymax - *ymin) : 1.0;
  return s;
}

std::vector<double> to_normalized(ModelKind kind, std::span<const double> p, const Scaling& s) {
  switch (kind) {
    case ModelKind::Lorentzian:
      return {(p[0] - s.x0) / s.sx, p[1] / s.sx, p[2] / s.sy, (p[3] - s.y0) / s.sy};
    case ModelKind::ExpDecay:
      return {p[0] * std::exp(-p[1] * s.x0) / s.sy, p[1] * s.sx, (p[2] - s.y0) / s.sy};
    case ModelKind::DampedCosine:
      return {p[0] * std::exp(-p[3] * s.x0) / s.sy, p[1] * s.sx, p[2] + kTwoPi * p[1] * s.x0,
              p[3] * s.sx, (p[4] - s.y0) / s.sy};
    case ModelKind::Line:
      return {p[0] * s.sx / s.sy, (p[0] * s.x0 + p[1] - s.y0) / s.sy};
  }
  return {};
}

std::vector<double> to_physical(ModelKind kind, std::span<const double> q, const Scaling& s) {
  switch (kind) {
    case ModelKind::Lorentzian:
      return {s.x0 + s.sx * q[0], s.sx * q[1], s.sy * q[2], s.y0 + s.sy * q[3]};
    case ModelKind::ExpDecay: {
      const double rate = q[1] / s.sx;
      return {s.sy * q[0] * std::exp(rate * s.x0), rate, s.y0 + s.sy * q[2]};
    }
    case ModelKind::DampedCosine: {
      const double f = q[1] / s.sx;
      const double decay = q[3] / s.sx;
      return {s.sy * q[0] * std::exp(decay * s.x0), f, q[2] - kTwoPi * f * s.x0, decay,
              s.y0 + s.sy * q[4]};
    }
    case ModelKind::Line: {
      const double slope = q[0] * s.sy / s.sx;
      return {slope, s.y0 + s.sy * q[1] - slope * s.x0};
    }
  }
  return {};
}

// Value and gradient with respect to the parameters.
double value_and_gradient(ModelKind kind, std::span<const double> p, double x,
                          std::span<double> grad) {
  switch (kind) {
    case ModelKind::Lorentzian: {
      const double c = p[0], w = p[1], d = p[2], b = p[3];
      const double s = 2.0 * (x - c) / w;
      const double l = 1.0 / (1.0 + s * s);
      grad[0] = -4.0 * d * s * l * l / w;
      grad[1] = -2.0 * d * s * s * l * l / w;
      grad[2] = -l;
      grad[3] = 1.0;
      return b - d * l;
    }
    case ModelKind::ExpDecay: {
      const double e = std::exp(-p[1] * x);
      grad[0] = e;
      grad[1] = -p[0] * x * e;
      grad[2] = 1.0;
      return p[0] * e + p[2];
    }
    case ModelKind::DampedCosine: {
      const double env = std::exp(-p[3] * x);
      const double theta = kTwoPi * p[1] * x + p[2];
      const double c = std::cos(theta), sn = std::sin(theta);
      grad[0] = env * c;
      grad[1] = -p[0] * env * sn * kTwoPi * x;
      grad[2] = -p[0] * env * sn;
      grad[3] = -x * p[0] * env * c;
      grad[4] = 1.0;
      return p[0] * env * c + p[4];
    }
    case ModelKind::Line:
      grad[0] = x;
      grad[1] = 1.0;
      return p[0] * x + p[1];
  }
  return 0.0;
}

struct Linearization {
  Eigen::MatrixXd jac;
  Eigen::VectorXd residual;  // model - data
  double cost = 0.0;
};

Linearization linearize(ModelKind kind, std::span<const double> p, std::span<const double> x,
                        std::span<const double> y) {
  const auto m = static_cast<Eigen::Index>(x.size());
  const auto n = static_cast<Eigen::Index>(p.size());
  Linearization lin{Eigen::MatrixXd(m, n), Eigen::VectorXd(m), 0.0};
  std::vector<double> grad(p.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    lin.residual(i) = value_and_gradient(kind, p, x[i], grad) - y[i];
    for (Eigen::Index j = 0; j < n; ++j) lin.jac(i, j) = grad[j];
  }
  lin.cost = lin.residual.squaredNorm();
  return lin;
}

double cost_at(ModelKind kind, std::span<const double> p, std::span<const double> x,
               std::span<const double> y) {
  double c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = evaluate(kind, p, x[i]) - y[i];
    c += r * r;
  }
  return c;
}

// Unit-diagonal normal matrix; its smallest eigenvalue measures collinearity.
double min_scaled_eigenvalue(const Eigen::MatrixXd& normal) {
  const Eigen::VectorXd d = normal.diagonal().cwiseSqrt();
  if ((d.array() <= 0.0).any()) return 0.0;
  const Eigen::MatrixXd c = d.cwiseInverse().asDiagonal() * normal * d.cwiseInverse().asDiagonal();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

void check_inputs(std::span<const double> x, std::span<const double> y, std::size_t nparams) {
  if (x.size() != y.size()) throw InvalidInput("fit: x and y lengths differ");
  if (x.size() < 2 * nparams) {
    throw InvalidInput("fit: need at least " + std::to_string(2 * nparams) + " points, got " +
                       std::to_string(x.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidInput("fit: non-finite data");
  }
}

std::vector<double> init_lorentzian(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const std::size_t edge = std::max<std::size_t>(1, n / 10);
  std::vector<double> edges(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(edge));
  edges.insert(edges.end(), y.end() - static_cast<std::ptrdiff_t>(edge), y.end());
  const double baseline = median(edges);
  const auto imin = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
  const auto imax = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const bool dip = (baseline - y[imin]) >= (y[imax] - baseline);
  const std::size_t ext = dip ? imin : imax;
  const double depth = baseline - y[ext];
  const double level = baseline - 0.5 * depth;
  auto inside = [&](std::size_t i) { return dip ? y[i] < level : y[i] > level; };

  std::optional<double> left, right;
  for (std::size_t i = ext; i > 0; --i) {
    if (!inside(i - 1)) {
      const double t = (level - y[i]) / (y[i - 1] - y[i]);
      left = x[i] + t * (x[i - 1] - x[i]);
      break;
    }
  }
  for (std::size_t i = ext; i + 1 < n; ++i) {
    if (!inside(i + 1)) {
      const double t = (level - y[i]) / (y[i + 1] - y[i]);
      right = x[i] + t * (x[i + 1] - x[i]);
      break;
    }
  }
  double fwhm = (x.back() - x.front()) / 10.0;
  if (left && right) {
    fwhm = *right - *left;
  } else if (left) {
    fwhm = 2.0 * (x[ext] - *left);
  } else if (right) {
    fwhm = 2.0 * (*right - x[ext]);
  }
  if (!(fwhm > 0.0)) fwhm = (x.back() - x.front()) / 10.0;
  return {x[ext], fwhm, depth, baseline};
}

std::vector<double> init_exp_decay(std::span<const double> x, std::span<const double> y) {
  const double first = y.front(), last = y.back();
  const double sign = first >= last ? 1.0 : -1.0;
  const double range = std::abs(first - last) > 0 ? std::abs(first - last) : 1.0;
  const double offset = last - sign * 0.05 * range;
  // Weighted log-linear regression on the offset-removed magnitude.
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = sign * (y[i] - offset);
    if (z <= 0.1 * 0.05 * range) continue;
    const double w = z * z;
    const double lz = std::log(z);
    sw += w;
    sx += w * x[i];
    sy += w * lz;
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * lz;
  }
  const double det = sw * sxx - sx * sx;
  double rate = 1.0 / (x.back() - x.front());
  double amp = first - offset;
  if (sw > 0 && std::abs(det) > 0) {
    const double slope = (sw * sxy - sx * sy) / det;
    const double icpt = (sy - slope * sx) / sw;
    if (slope < 0) {
      rate = -slope;
      amp = sign * std::exp(icpt);
    }
  }
  return {amp, rate, offset};
}

std::vector<double> init_damped_cosine(std::span<const double> x, std::span<const double> y) {
  const SpectralPeak peak = spectral_peak(x, y);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  const std::size_t half = y.size() / 2;
  auto rms = [&](std::size_t lo, std::size_t hi) {
    double s = 0;
    for (std::size_t i = lo; i < hi; ++i) s += (y[i] - mean) * (y[i] - mean);
    return std::sqrt(s / static_cast<double>(hi - lo));
  };
  const double r1 = rms(0, half), r2 = rms(half, y.size());
  const double span = x.back() - x.front();
  double decay = 0.0;
  if (r1 > r2 && r2 > 0) decay = std::log(r1 / r2) / (0.5 * span);
  const double amp0 = std::sqrt(2.0) * r1 * std::exp(0.25 * decay * span);
  const double x0 = x.front();
  return {amp0 * std::exp(decay * x0), peak.frequency, peak.phase - kTwoPi * peak.frequency * x0,
          decay, mean};
}

std::vector<double> init_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

}  // namespace

std::size_t parameter_count(ModelKind kind) {
  switch (kind) {
    case ModelKind::Lorentzian: return 4;
    case ModelKind::ExpDecay: return 3;
    case ModelKind::DampedCosine: return 5;
    case ModelKind::Line: return 2;
  }
  return 0;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Lorentzian: return "lorentzian";
    case ModelKind::ExpDecay: return "exp_decay";
    case ModelKind::DampedCosine: return "damped_cosine";
    case ModelKind::Line: return "line";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (auto k : {ModelKind::Lorentzian, ModelKind::ExpDecay, ModelKind::DampedCosine,
                 ModelKind::Line}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidInput("unknown model kind '" + std::string(name) + "'");
}

double evaluate(ModelKind kind, std::span<const double> params, double x) {
  double grad[5];
  return value_and_gradient(kind, params, x, std::span<double>(grad, parameter_count(kind)));
}

std::vector<double> auto_initial(ModelKind kind, std::span<const double> x,
                                 std::span<const double> y) {
  check_inputs(x, y, parameter_count(kind));
  switch (kind) {
    case ModelKind::Lorentzian: return init_lorentzian(x, y);
    case ModelKind::ExpDecay: return init_exp_decay(x, y);
    case ModelKind::DampedCosine: return init_damped_cosine(x, y);
    case ModelKind::Line: return init_line(x, y);
  }
  return {};
}

FitResult nlls_fit(std::span<const double> x, std::span<const double> y, const ModelSpec& spec,
                   const FitOptions& options) {
  const std::size_t nparams = parameter_count(spec.kind);
  check_inputs(x, y, nparams);
  std::vector<double> initial = spec.initial ? *spec.initial : auto_initial(spec.kind, x, y);
  if (initial.size() != nparams) {
    throw InvalidInput("fit: " + std::string(to_string(spec.kind)) + " takes " +
                       std::to_string(nparams) + " parameters");
  }

  const Scaling sc = make_scaling(x, y);
  std::vector<double> u(x.size()), v(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    u[i] = (x[i] - sc.x0) / sc.sx;
    v[i] = (y[i] - sc.y0) / sc.sy;
  }
  std::vector<double> q = to_normalized(spec.kind, initial, sc);
  for (double qi : q) {
    if (!std::isfinite(qi)) throw InvalidInput("fit: non-finite initial parameters");
  }

  FitResult result;
  result.kind = spec.kind;
  const double cost_scale = sc.sy * sc.sy;
  const auto n = static_cast<Eigen::Index>(nparams);

  Linearization lin = linearize(spec.kind, q, u, v);
  Eigen::MatrixXd normal = lin.jac.transpose() * lin.jac;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (normal(j, j) == 0.0) {
      throw DegenerateJacobian("fit: parameter " + std::to_string(j) + " of " +
                               std::string(to_string(spec.kind)) + " has no influence");
    }
  }
  if (min_scaled_eigenvalue(normal) < 1e-14) {
    throw DegenerateJacobian("fit: Jacobian columns are collinear");
  }

  double lambda = 1e-3 * normal.trace() / static_cast<double>(nparams);
  result.cost_history.push_back(lin.cost * cost_scale);
  const double tiny_cost = 1e-30 * static_cast<double>(u.size());

  int iter = 0;
  bool converged = lin.cost <= tiny_cost;
  while (!converged && iter < options.max_iterations) {
    ++iter;
    const Eigen::VectorXd gradient = lin.jac.transpose() * lin.residual;
    Eigen::MatrixXd damped = normal;
    damped.diagonal().array() += lambda;
    const Eigen::VectorXd step = damped.ldlt().solve(-gradient);

    std::vector<double> trial(q);
    for (Eigen::Index j = 0; j < n; ++j) trial[j] += step(j);
    const double qnorm = Eigen::Map<const Eigen::VectorXd>(q.data(), n).norm();
    const bool small_step = step.norm() < options.step_tolerance * (qnorm + 1e-30);

    const double trial_cost = cost_at(spec.kind, trial, u, v);
    if (std::isfinite(trial_cost) && trial_cost < lin.cost) {
      const double rel_change = (lin.cost - trial_cost) / lin.cost;
      q = std::move(trial);
      lin = linearize(spec.kind, q, u, v);
      normal = lin.jac.transpose() * lin.jac;
      result.cost_history.push_back(lin.cost * cost_scale);
      lambda /= 3.0;
      converged = small_step || rel_change < options.cost_tolerance || lin.cost <= tiny_cost;
    } else {
      lambda *= 3.0;
      converged = small_step;
      if (!std::isfinite(lambda) || lambda > 1e300) break;
    }
  }

  result.iterations = iter;
  result.converged = converged;
  result.params = to_physical(spec.kind, q, sc);

  // Uncertainties in physical coordinates, column-scaled for conditioning.
  const Linearization phys = linearize(spec.kind, result.params, x, y);
  result.residual_norm = std::sqrt(phys.cost);
  const double dof = static_cast<double>(x.size() - nparams);
  const double s2 = phys.cost / dof;
  const Eigen::MatrixXd a = phys.jac.transpose() * phys.jac;
  const Eigen::VectorXd d = a.diagonal().cwiseSqrt();
  result.sigma.assign(nparams, std::numeric_limits<double>::infinity());
  if ((d.array() > 0.0).all()) {
    const Eigen::MatrixXd dinv = d.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd scaled = dinv * a * dinv;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    if (qr.isInvertible()) {
      const Eigen::MatrixXd cov = dinv * qr.inverse() * dinv * s2;
      for (Eigen::Index j = 0; j < n; ++j) result.sigma[j] = std::sqrt(std::max(0.0, cov(j, j)));
    }
  }
  return result;
}

SpectralPeak spectral_peak(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 4) throw InvalidInput("spectral_peak: need >= 4 points");
  const std::size_t n = x.size();
  const double dx = (x.back() - x.front()) / static_cast<double>(n - 1);
  const double record = dx * static_cast<double>(n);
  const double f_lo = 1.5 / record;
  const double f_hi = 0.5 / dx;
  const double df = 1.0 / (8.0 * record);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  std::vector<double> amps;
  std::vector<std::complex<double>> sums;
  std::vector<double> freqs;
  for (double f = f_lo; f <= f_hi; f += df) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = -kTwoPi * f * (x[i] - x.front());
      acc += (y[i] - mean) * std::complex<double>(std::cos(arg), std::sin(arg));
    }
    freqs.push_back(f);
    sums.push_back(acc);
    amps.push_back(2.0 * std::abs(acc) / static_cast<double>(n));
  }
  if (amps.empty()) throw InvalidInput("spectral_peak: record too short for the search band");
  const auto k = static_cast<std::size_t>(std::max_element(amps.begin(), amps.end()) - amps.begin());
  SpectralPeak peak;
  peak.frequency = freqs[k];
  // Parabolic refinement on the oversampled grid.
  if (k > 0 && k + 1 < amps.size()) {
    const double a = amps[k - 1], b = amps[k], c = amps[k + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0) peak.frequency += 0.5 * (a - c) / denom * df;
  }
  peak.amplitude = amps[k];
  peak.phase = std::arg(sums[k]);
  peak.median = median(amps);
  peak.at_band_edge = (k == 0);
  return peak;
}

OscillationEstimate extract_oscillation_frequency(std::span<const double> t,
                                                  std::span<const double> y) {
  const SpectralPeak peak = spectral_peak(t, y);
  if (peak.at_band_edge || peak.amplitude < 3.0 * peak.median) {
    throw NoOscillation("no spectral peak above 3x the median inside the band");
  }
  OscillationEstimate est;
  est.fit = nlls_fit(t, y, ModelSpec{ModelKind::DampedCosine, std::nullopt});
  const double f = std::abs(est.fit.params[1]);
  if (!est.fit.converged || !std::isfinite(f) || std::abs(f - peak.frequency) > 0.25 * peak.frequency) {
    throw NoOscillation("damped-cosine refinement failed near " + std::to_string(peak.frequency));
  }
  est.frequency = f;
  return est;
}

std::vector<BiasPair> crosstalk_correct(std::span<const BiasPair> pairs, double alpha) {
  std::vector<BiasPair> out(pairs.begin(), pairs.end());
  for (auto& p : out) p.qubit_bias -= alpha * p.gmon_bias;
  return out;
}

CrosstalkFit fit_crosstalk(std::span<const SpectroscopyPoint> points,
                           const std::function<double(double)>& model, double alpha_lo,
                           double alpha_hi) {
  if (points.size() < 3) throw InvalidInput("fit_crosstalk: need at least 3 points");
  if (!(alpha_hi > alpha_lo)) throw InvalidInput("fit_crosstalk: empty alpha bracket");
  auto variance = [&](double alpha) {
    double s = 0, ss = 0;
    for (const auto& p : points) {
      const double r = p.qubit_frequency - model(p.qubit_bias - alpha * p.gmon_bias);
      s += r;
      ss += r * r;
    }
    const double n = static_cast<double>(points.size());
    return ss / n - (s / n) * (s / n);
  };
  constexpr int kScan = 200;
  const double h = (alpha_hi - alpha_lo) / kScan;
  double best = alpha_lo, best_val = variance(alpha_lo);
  for (int i = 1; i <= kScan; ++i) {
    const double a = alpha_lo + h * i;
    const double val = variance(a);
    if (val < best_val) {
      best_val = val;
      best = a;
    }
  }
  const auto [alpha, val] = boost::math::tools::brent_find_minima(
      variance, std::max(alpha_lo, best - h), std::min(alpha_hi, best + h), 52);
  return {alpha, val};
}

double spectroscopy_asymmetry(std::span<const SpectroscopyPoint> points, double alpha) {
  std::map<double, std::vector<std::pair<double, double>>> rows;
  for (const auto& p : points) {
    rows[p.gmon_bias].emplace_back(p.qubit_bias - alpha * p.gmon_bias, p.qubit_frequency);
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (auto& [gmon, row] : rows) {
    std::sort(row.begin(), row.end());
    if (row.size() < 2) continue;
    for (const auto& [b, f] : row) {
      const double mirror = -b;
      if (mirror < row.front().first || mirror > row.back().first) continue;
      auto hi = std::lower_bound(row.begin(), row.end(), std::make_pair(mirror, -1e300));
      double fm;
      if (hi == row.begin()) {
        fm = hi->second;
      } else {
        auto lo = hi - 1;
        const double t = (mirror - lo->first) / (hi->first - lo->first);
        fm = lo->second + t * (hi->second - lo->second);
      }
      acc += (f - fm) * (f - fm);
      ++count;
    }
  }
  if (count == 0) throw InvalidInput("spectroscopy_asymmetry: no mirrored points in range");
  return std::sqrt(acc / static_cast<double>(count));
}

StarkSlopeReport stark_slope_analysis(std::span<const StarkScan> scans) {
  if (scans.empty()) throw InvalidInput("stark_slope_analysis: no scans");
  StarkSlopeReport report;
  double num = 0.0, den = 0.0;
  for (const auto& scan : scans) {
    if (scan.points.size() < 3) throw InvalidInput("stark_slope_analysis: scan needs >= 3 points");
    std::vector<double> n, shift;
    for (const auto& [nm, s] : scan.points) {
      n.push_back(nm);
      shift.push_back(s);
    }
    const FitResult line = nlls_fit(n, shift, ModelSpec{ModelKind::Line, std::nullopt});
    StarkSlope s;
    s.coupling = scan.coupling;
    s.slope = line.params[0];
    s.slope_err = line.sigma[0];
    report.per_scan.push_back(s);
    const double g2 = scan.coupling * scan.coupling;
    num += s.slope * g2;
    den += g2 * g2;
  }
  if (den == 0.0) throw InvalidInput("stark_slope_analysis: all couplings are zero");
  report.c = num / den;
  for (auto& s : report.per_scan) {
    const double expected = report.c * s.coupling * s.coupling;
    s.relative_deviation = expected != 0.0 ? (s.slope - expected) / expected : 0.0;
  }
  return report;
}

}  // namespace qad::fit
