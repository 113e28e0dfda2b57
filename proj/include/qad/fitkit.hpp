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

// Nonlinear least squares and the trace-analysis recipes built on it.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qad::fit {

enum class ModelKind { Lorentzian, ExpDecay, DampedCosine, Line };

/// Parameter layouts:
///   Lorentzian   [center, fwhm, depth, baseline]
///                y = baseline - depth / (1 + ((x - center) / (fwhm / 2))^2)
///                (negative depth describes a peak)
///   ExpDecay     [amplitude, rate, offset]          y = A exp(-rate x) + offset
///   DampedCosine [amplitude, frequency, phase, decay, offset]
///                y = A exp(-decay x) cos(2 pi frequency x + phase) + offset
///   Line         [slope, intercept]
std::size_t parameter_count(ModelKind kind);
std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

double evaluate(ModelKind kind, std::span<const double> params, double x);

struct ModelSpec {
  ModelKind kind = ModelKind::Line;
  // Explicit initial parameters; auto-initialization when empty.
  std::optional<std::vector<double>> initial;
};

struct FitOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;
  double cost_tolerance = 1e-12;
};

struct FitResult {
  ModelKind kind = ModelKind::Line;
  std::vector<double> params;
  std::vector<double> sigma;  // one-sigma, from the final Jacobian
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  // Sum of squares after each accepted step, starting with the initial guess.
  std::vector<double> cost_history;
  std::optional<std::uint64_t> seed;

  double operator[](std::size_t i) const { return params.at(i); }
};

/// Damped Gauss-Newton (Levenberg) fit. Throws InvalidInput for too few or
/// non-finite points and DegenerateJacobian when a parameter has no influence.
/// A fit that runs out of iterations is returned with converged == false.
FitResult nlls_fit(std::span<const double> x, std::span<const double> y,
                   const ModelSpec& spec, const FitOptions& options = {});

/// Unattended starting point used when ModelSpec::initial is empty.
std::vector<double> auto_initial(ModelKind kind, std::span<const double> x,
                                 std::span<const double> y);

struct SpectralPeak {
  double frequency = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;  // of cos(2 pi f (x - x0) + phase)
  double median = 0.0;
  bool at_band_edge = false;
};

/// Peak of the discrete amplitude spectrum of mean-removed data, evaluated on
/// an oversampled frequency grid between 1.5 cycles per record and Nyquist.
SpectralPeak spectral_peak(std::span<const double> x, std::span<const double> y);

struct OscillationEstimate {
  double frequency = 0.0;  // Hz when x is in seconds
  FitResult fit;
};

/// Dominant oscillation frequency of a uniformly sampled trace: spectral peak
/// refined with a DampedCosine fit. Throws NoOscillation when the peak is not
/// at least 3x the spectral median or sits at the low edge of the band.
OscillationEstimate extract_oscillation_frequency(std::span<const double> t,
                                                  std::span<const double> y);

struct BiasPair {
  double gmon_bias = 0.0;
  double qubit_bias = 0.0;
};

/// qubit_bias' = qubit_bias - alpha * gmon_bias.
std::vector<BiasPair> crosstalk_correct(std::span<const BiasPair> pairs, double alpha);

struct SpectroscopyPoint {
  double gmon_bias = 0.0;
  double qubit_bias = 0.0;       // flux quanta
  double qubit_frequency = 0.0;  // Hz
};

struct CrosstalkFit {
  double alpha = 0.0;
  double residual_variance = 0.0;
};

/// Fits alpha by minimizing the variance of measured frequency minus
/// `model(corrected qubit bias)`: coarse scan over [alpha_lo, alpha_hi]
/// followed by Brent refinement.
CrosstalkFit fit_crosstalk(std::span<const SpectroscopyPoint> points,
                           const std::function<double(double)>& model,
                           double alpha_lo = -1.0, double alpha_hi = 1.0);

/// RMS mismatch between f(b) and f(-b) over rows of equal gmon bias, with b the
/// crosstalk-corrected qubit bias and f(-b) linearly interpolated in the row.
/// Zero for a map that is symmetric about the sweet spot.
double spectroscopy_asymmetry(std::span<const SpectroscopyPoint> points, double alpha);

struct StarkScan {
  double coupling = 0.0;                         // g_c, rad/s
  std::vector<std::pair<double, double>> points;  // (<n>, shift)
};

struct StarkSlope {
  double coupling = 0.0;
  double slope = 0.0;
  double slope_err = 0.0;
  double relative_deviation = 0.0;  // (slope - c g^2) / (c g^2)
};

struct StarkSlopeReport {
  std::vector<StarkSlope> per_scan;
  double c = 0.0;  // slope = c * g^2
};

StarkSlopeReport stark_slope_analysis(std::span<const StarkScan> scans);

}  // namespace qad::fit
