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

#include "qad/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "json.hpp"
#include "qad/circuit_model.hpp"
#include "qad/config.hpp"
#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"
#include "qad/dynamics.hpp"
#include "qad/fitkit.hpp"
#include "qad/manifest.hpp"
#include "qad/saw_model.hpp"
#include "qad/trace_io.hpp"

namespace qad::pipe {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using config::DeviceConfig;
using io::Table;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Reference values of the reproduced device.
constexpr double kRefIdtBandwidth = 184e6;
constexpr double kRefStopband = 120e6;
constexpr double kRefSeriesResistance = 2.92;
constexpr double kRefCharacteristicImpedance = 4.82e3;
constexpr double kRefLinewidth = 2.5e6;
constexpr double kRefCouplingAtZero = 6.7e6;
constexpr double kRefCouplingExtreme = 7.0e6;
constexpr double kRefSwapSegment = 40e-9;
constexpr double kRefPhononLifetime = 205e-9;
constexpr double kRefQuality = 5025.0;

struct Context {
  const DeviceConfig& cfg;
  const RunOptions& opts;
  fs::path dir;
  json report;
  CommandResult result;
  std::map<std::string, std::string> manifest_options;
};

double rel_err(double computed, double reference) { return std::abs(computed - reference) / std::abs(reference); }

void add_check(Context& ctx, std::string name, double reference, double computed, double tol, Check::Mode mode) {
  ctx.result.checks.push_back(make_check(std::move(name), reference, computed, tol, mode));
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const NoResonanceFound*>(&e)) return "NoResonanceFound";
  if (dynamic_cast<const GridTooCoarse*>(&e)) return "GridTooCoarse";
  if (dynamic_cast<const PhasePole*>(&e)) return "PhasePole";
  if (dynamic_cast<const CouplingPole*>(&e)) return "CouplingPole";
  if (dynamic_cast<const Unreachable*>(&e)) return "Unreachable";
  if (dynamic_cast<const TruncationTooSmall*>(&e)) return "TruncationTooSmall";
  if (dynamic_cast<const IntegratorDiverged*>(&e)) return "IntegratorDiverged";
  if (dynamic_cast<const ZeroDetuning*>(&e)) return "ZeroDetuning";
  if (dynamic_cast<const DegenerateJacobian*>(&e)) return "DegenerateJacobian";
  if (dynamic_cast<const NoOscillation*>(&e)) return "NoOscillation";
  return "NumericalError";
}

json bvd_json(const saw::BvdParams& p) {
  return {{"inductance_h", p.inductance},     {"capacitance_f", p.capacitance},
          {"resistance_ohm", p.resistance},   {"static_capacitance_f", p.static_capacitance},
          {"resonance_hz", p.resonance},      {"quality", p.quality},
          {"characteristic_impedance_ohm", p.characteristic_impedance()},
          {"linewidth_hz", p.linewidth()}};
}

std::size_t grid_points(const Context& ctx, std::size_t fallback, std::size_t minimum, const char* what) {
  const std::size_t n = ctx.opts.points.value_or(fallback);
  if (n < minimum) throw InvalidInput(fmt::format("{}: --points must be >= {} (got {})", what, minimum, n));
  return n;
}

std::vector<double> grid(double lo, double hi, std::size_t n) {
  if (n == 1) return {lo};
  return linspace(lo, hi, n);
}

// saw-response ----------------------------------------------------------------

void saw_response(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& g = cfg.geometry;
  const auto& sw = cfg.sweeps;
  const std::size_t n = grid_points(ctx, sw.saw_points, 2, "saw-response");
  const auto freqs = linspace(sw.saw_f_min_hz, sw.saw_f_max_hz, n);

  Table idt{{"frequency_hz", "conductance_s", "susceptance_s"}, {}};
  Table mirror{{"frequency_hz", "re_gamma", "im_gamma", "abs_gamma"}, {}};
  for (double f : freqs) {
    idt.rows.push_back({f, saw::idt_conductance(f, g), saw::idt_susceptance(f, g)});
    const auto gamma = saw::mirror_reflection(f, g);
    mirror.rows.push_back({f, gamma.real(), gamma.imag(), std::abs(gamma)});
  }
  io::write_csv(ctx.dir / "idt_admittance.csv", idt);
  io::write_csv(ctx.dir / "mirror_reflection.csv", mirror);

  // Bandwidths are reported from dense internal grids so that they do not
  // depend on the emitted sampling.
  const double f0 = saw::geometry_to_f0(g);
  const double idt_bw = saw::idt_bandwidth(g);
  const std::size_t dense = std::max<std::size_t>(n, 12001);
  const double stopband = saw::mirror_stopband(g, sw.saw_f_min_hz, sw.saw_f_max_hz, dense);
  double band_peak = 0.0;
  for (double f : linspace(f0 - 10e6, f0 + 10e6, 4001)) band_peak = std::max(band_peak, std::abs(saw::mirror_reflection(f, g)));
  const double band_expected = std::tanh(g.mirror_cells * std::abs(g.electrode_reflection));
  ctx.report["saw"] = {{"center_frequency_hz", f0},
                       {"idt_bandwidth_hz", idt_bw},
                       {"mirror_stopband_hz", stopband},
                       {"band_center_reflection", band_peak},
                       {"band_center_reflection_tanh", band_expected},
                       {"peak_conductance_s", saw::peak_conductance(g)}};
  add_check(ctx, "idt_bandwidth_hz", kRefIdtBandwidth, idt_bw, 0.03, Check::Mode::Relative);
  add_check(ctx, "mirror_stopband_hz", kRefStopband, stopband, 0.15, Check::Mode::Relative);
  add_check(ctx, "band_center_reflection", band_expected, band_peak, 0.01, Check::Mode::Relative);
  ctx.result.summary.push_back(fmt::format("f0 = {:.4f} GHz, IDT bandwidth = {:.1f} MHz, mirror stopband = {:.1f} MHz",
                                           f0 / 1e9, idt_bw / 1e6, stopband / 1e6));

  const auto& truth = cfg.bvd;
  ctx.report["bvd_model"] = bvd_json(truth);
  add_check(ctx, "bvd_characteristic_impedance_ohm", kRefCharacteristicImpedance,
            truth.characteristic_impedance(), 0.01, Check::Mode::Relative);
  add_check(ctx, "bvd_series_resistance_ohm", kRefSeriesResistance, truth.resistance, 0.01, Check::Mode::Relative);
  add_check(ctx, "bvd_linewidth_hz", kRefLinewidth, truth.linewidth(), 0.10, Check::Mode::Relative);

  const std::size_t nb = ctx.opts.points.value_or(sw.bvd_points);
  const auto bvd_grid = saw::resonance_grid(truth, nb, sw.bvd_span_linewidths);
  const std::uint64_t seed = ctx.opts.seed.value_or(cfg.seed);
  const auto trace = saw::synthesize_s11(truth, bvd_grid, cfg.reference_impedance, sw.s11_noise, seed);
  io::write_s11_csv(ctx.dir / "bvd_s11.csv", trace);
  io::write_s11_text(ctx.dir / "bvd_s11.s1p", trace, cfg.reference_impedance);

  saw::FrequencyTrace source = trace;
  double z0 = cfg.reference_impedance;
  if (ctx.opts.s11_input) {
    const auto file = io::read_s11(*ctx.opts.s11_input);
    source = file.trace;
    z0 = file.z0;
    ctx.report["bvd_source"] = ctx.opts.s11_input->filename().string();
  } else {
    ctx.report["bvd_source"] = "bvd_s11.csv";
  }
  ctx.report["bvd_extraction"] = nullptr;
  const auto ex = saw::bvd_extract_detailed(source, z0);
  json extracted = bvd_json(ex.params);
  extracted["points_in_linewidth"] = ex.points_in_linewidth;
  extracted["noise_floor"] = ex.noise_floor;
  extracted["dip_depth"] = ex.dip_depth;
  extracted["relative_error"] = {{"inductance", rel_err(ex.params.inductance, truth.inductance)},
                                 {"capacitance", rel_err(ex.params.capacitance, truth.capacitance)},
                                 {"resistance", rel_err(ex.params.resistance, truth.resistance)}};
  ctx.report["bvd_extraction"] = extracted;
  add_check(ctx, "bvd_roundtrip_inductance_h", truth.inductance, ex.params.inductance, 0.01, Check::Mode::Relative);
  add_check(ctx, "bvd_roundtrip_capacitance_f", truth.capacitance, ex.params.capacitance, 0.01, Check::Mode::Relative);
  add_check(ctx, "bvd_roundtrip_resistance_ohm", truth.resistance, ex.params.resistance, 0.01, Check::Mode::Relative);
  ctx.result.summary.push_back(fmt::format("BVD extracted: L_s = {:.2f} nH, C_s = {:.3f} fF, R_s = {:.3f} ohm, Q = {:.0f}",
                                           ex.params.inductance * 1e9, ex.params.capacitance * 1e15,
                                           ex.params.resistance, ex.params.quality));
}

// coupling-map ----------------------------------------------------------------

void coupling_map(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& sw = cfg.sweeps;
  const std::size_t n = grid_points(ctx, sw.bias_points, 1, "coupling-map");
  const auto biases = grid(sw.bias_min_rad, sw.bias_max_rad, n);
  const double beta = cfg.gmon_loop_beta();
  const auto curve = circuit::coupling_bias_curve(biases, cfg.ledger, beta);

  Table t{{"bias_rad", "delta_rad", "coupling_hz", "pole_adjacent"}, {}};
  std::optional<circuit::CouplingPoint> lo, hi;
  std::size_t flagged = 0;
  for (const auto& pt : curve) {
    t.rows.push_back({pt.bias, pt.delta, pt.coupling ? rad_to_hz(*pt.coupling) : kNaN, pt.coupling ? 0.0 : 1.0});
    if (!pt.coupling) {
      ++flagged;
      continue;
    }
    if (!lo || *pt.coupling < *lo->coupling) lo = pt;
    if (!hi || *pt.coupling > *hi->coupling) hi = pt;
  }
  io::write_csv(ctx.dir / "coupling_map.csv", t);

  auto ledger = cfg.ledger;
  ledger.gmon.delta = 0.0;
  const double g0 = rad_to_hz(circuit::coupling_strength(ledger));
  json rep = {{"loop_beta", beta}, {"coupling_at_zero_phase_hz", g0}, {"pole_adjacent_rows", flagged}};
  if (lo) {
    rep["min_coupling_hz"] = rad_to_hz(*lo->coupling);
    rep["min_coupling_bias_rad"] = lo->bias;
    rep["max_coupling_hz"] = rad_to_hz(*hi->coupling);
    rep["max_coupling_bias_rad"] = hi->bias;
  }
  add_check(ctx, "coupling_at_zero_phase_hz", kRefCouplingAtZero, g0, 0.1e6, Check::Mode::Absolute);
  add_check(ctx, "coupling_positive_extreme_hz", kRefCouplingExtreme, g0, 0.05, Check::Mode::Relative);

  const double target = hz_to_rad(sw.chevron_coupling_hz);
  ctx.report["coupling_map"] = rep;
  const double delta = circuit::solve_delta_for_g(target, cfg.ledger);
  ledger.gmon.delta = delta;
  const double reached = rad_to_hz(circuit::coupling_strength(ledger));
  const double residual = std::abs(reached - sw.chevron_coupling_hz);
  rep["target"] = {{"coupling_hz", sw.chevron_coupling_hz},
                   {"delta_rad", delta},
                   {"bias_rad", delta + beta * std::sin(delta)},
                   {"reached_hz", reached},
                   {"residual_hz", residual}};
  ctx.report["coupling_map"] = rep;
  add_check(ctx, "target_coupling_residual_hz", 1e3, residual, 1e3, Check::Mode::UpperBound);
  ctx.result.summary.push_back(fmt::format("g_c(delta=0)/2pi = {:.3f} MHz; target {:.2f} MHz at delta = {:.4f} rad",
                                           g0 / 1e6, sw.chevron_coupling_hz / 1e6, delta));
  if (lo) {
    ctx.result.summary.push_back(fmt::format("map range: {:.3f} MHz (bias {:.3f}) to {:.3f} MHz (bias {:.3f}), {} pole rows",
                                             rad_to_hz(*lo->coupling) / 1e6, lo->bias,
                                             rad_to_hz(*hi->coupling) / 1e6, hi->bias, flagged));
  }
}

// chevron ---------------------------------------------------------------------

void chevron(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& sw = cfg.sweeps;
  auto ledger = cfg.ledger;
  const double delta = circuit::solve_delta_for_g(hz_to_rad(sw.chevron_coupling_hz), ledger);
  ledger.gmon.delta = delta;
  auto p = cfg.system;
  p.g_c = circuit::coupling_strength(ledger);

  const std::size_t nt = grid_points(ctx, sw.chevron_times, 2, "chevron");
  const auto times = linspace(0.0, sw.chevron_t_max_s, nt);
  const std::size_t nd = sw.chevron_span_hz == 0.0 ? 1 : sw.chevron_detunings;
  std::vector<double> dets;
  for (double d : nd == 1 ? std::vector<double>{0.0} : linspace(-sw.chevron_span_hz, sw.chevron_span_hz, nd)) {
    dets.push_back(hz_to_rad(d));
  }
  const auto map = dyn::vacuum_rabi_chevron(p, dets, times, cfg.integrator.sequence.integrator);
  io::write_chevron_csv(ctx.dir / "chevron_map.csv", map);

  Table freq{{"detuning_hz", "frequency_hz", "expected_hz", "relative_error"}, {}};
  double worst = 0.0;
  std::size_t centre = 0;
  std::vector<double> found(dets.size(), kNaN);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    std::vector<double> row(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) row[j] = map.p_e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const double expected = rad_to_hz(std::sqrt(dets[i] * dets[i] + 4.0 * p.g_c * p.g_c));
    try {
      found[i] = fit::extract_oscillation_frequency(times, row).frequency;
    } catch (const NumericalError& e) {
      warn(fmt::format("chevron: no oscillation at detuning {:.2f} MHz ({})", rad_to_hz(dets[i]) / 1e6, e.what()));
    }
    const double err = std::isfinite(found[i]) ? rel_err(found[i], expected) : kNaN;
    freq.rows.push_back({rad_to_hz(dets[i]), found[i], expected, err});
    if (std::abs(dets[i]) <= 5.0 * std::abs(p.g_c) * (1 + 1e-12)) worst = std::max(worst, std::isfinite(err) ? err : 1.0);
    if (std::abs(dets[i]) < std::abs(dets[centre])) centre = i;
  }
  io::write_csv(ctx.dir / "chevron_frequencies.csv", freq);

  const double two_g = 2.0 * std::abs(sw.chevron_coupling_hz);
  ctx.report["chevron"] = {{"delta_rad", delta},
                           {"coupling_hz", rad_to_hz(p.g_c)},
                           {"two_g_hz", rad_to_hz(2.0 * std::abs(p.g_c))},
                           {"centre_detuning_hz", rad_to_hz(dets[centre])},
                           {"centre_frequency_hz", found[centre]},
                           {"max_law_relative_error", worst},
                           {"swap_duration_s", dyn::swap_duration(p)}};
  if (!std::isfinite(found[centre])) throw NoOscillation("chevron: no oscillation at the centre detuning");
  add_check(ctx, "vacuum_rabi_frequency_hz", two_g, found[centre], 0.01, Check::Mode::Relative);
  add_check(ctx, "chevron_law_max_relative_error", 0.01, worst, 0.01, Check::Mode::UpperBound);
  ctx.result.summary.push_back(fmt::format("g_c/2pi = {:.3f} MHz (delta = {:.4f} rad): beating {:.3f} MHz, 2g = {:.3f} MHz",
                                           rad_to_hz(p.g_c) / 1e6, delta, found[centre] / 1e6, two_g / 1e6));
}

// t1s / t2s -------------------------------------------------------------------

struct DelaySweep {
  std::vector<double> delays;
  std::vector<double> p_e;
  dyn::Trajectory last;
};

DelaySweep sweep_sequence(const Context& ctx, std::size_t n, double max_delay,
                          const std::function<dyn::PulseSequence(double)>& make) {
  DelaySweep s;
  s.delays = grid(0.0, max_delay, n);
  if (n == 1) s.delays = {max_delay};
  const auto& opts = ctx.cfg.integrator.sequence;
  for (std::size_t i = 0; i < s.delays.size(); ++i) {
    auto tr = dyn::run_sequence(make(s.delays[i]), ctx.cfg.system, opts);
    s.p_e.push_back(*tr.readout);
    if (i + 1 == s.delays.size()) s.last = std::move(tr);
  }
  return s;
}

void write_sweep(const Context& ctx, const std::string& stem, const DelaySweep& s) {
  Table t{{"delay_s", "p_e"}, {}};
  for (std::size_t i = 0; i < s.delays.size(); ++i) t.rows.push_back({s.delays[i], s.p_e[i]});
  io::write_csv(ctx.dir / (stem + "_populations.csv"), t);
  io::write_trajectory_csv(ctx.dir / (stem + "_trajectory.csv"), s.last);
}

json certify_truncation(Context& ctx, const dyn::PulseSequence& seq) {
  const double err = dyn::truncation_error(seq, ctx.cfg.system, ctx.cfg.integrator.sequence);
  if (err >= 1e-6) warn(fmt::format("Fock truncation changes populations by {:.2e} (limit 1e-6)", err));
  add_check(ctx, "truncation_population_change", 1e-6, err, 1e-6, Check::Mode::UpperBound);
  return {{"n_max", ctx.cfg.system.n_max}, {"population_change_at_n_max_plus_4", err}};
}

void t1s(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& p = cfg.system;
  const double ts = cfg.swap_time();
  const std::size_t n = grid_points(ctx, cfg.sweeps.t1_points, 1, "t1s");
  auto make = [&](double d) { return dyn::t1s_sequence(p, d, ts); };
  const auto s = sweep_sequence(ctx, n, cfg.sweeps.t1_delay_max_s, make);
  write_sweep(ctx, "t1s", s);

  const double purcell = dyn::purcell_rate(p);
  json rep = {{"swap_duration_s", ts},
              {"coupling_hz", rad_to_hz(p.g_c)},
              {"idle_detuning_hz", rad_to_hz(p.detuning())},
              {"purcell_rate_per_s", purcell},
              {"purcell_over_phonon_rate", purcell / p.gamma_S},
              {"fit", nullptr}};
  add_check(ctx, "swap_duration_vs_40ns_segment", kRefSwapSegment, ts, 0.15, Check::Mode::Relative);
  add_check(ctx, "purcell_over_phonon_rate", 1e-3, purcell / p.gamma_S, 1e-3, Check::Mode::UpperBound);
  rep["truncation"] = certify_truncation(ctx, make(cfg.sweeps.t1_delay_max_s));
  ctx.report["t1s"] = rep;
  if (s.delays.size() < 4) {
    throw DegenerateJacobian(fmt::format("t1s: {} delay(s) cannot constrain a 3-parameter decay; populations written",
                                         s.delays.size()));
  }
  const auto fit = fit::nlls_fit(s.delays, s.p_e, {fit::ModelKind::ExpDecay, std::nullopt});
  const double t1 = 1.0 / fit[1];
  const double q = dyn::quality_factor(p.omega0p, t1);
  rep["fit"] = {{"amplitude", fit[0]},  {"rate_per_s", fit[1]}, {"offset", fit[2]},
                {"t1s_s", t1},          {"t1s_sigma_s", fit.sigma[1] / (fit[1] * fit[1])},
                {"quality_factor", q},  {"converged", fit.converged}};
  ctx.report["t1s"] = rep;
  add_check(ctx, "phonon_lifetime_s", kRefPhononLifetime, t1, 0.02, Check::Mode::Relative);
  add_check(ctx, "saw_quality_factor", kRefQuality, q, 0.02, Check::Mode::Relative);
  ctx.result.summary.push_back(fmt::format("T1S = {:.1f} ns, Q = {:.0f}, Purcell/gamma_S = {:.2e}", t1 * 1e9, q,
                                           purcell / p.gamma_S));
}

void t2s(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& p = cfg.system;
  const double ts = cfg.swap_time();
  const double ramsey = hz_to_rad(cfg.sweeps.t2_ramsey_detuning_hz);
  const std::size_t n = grid_points(ctx, cfg.sweeps.t2_points, 1, "t2s");
  auto make = [&](double d) { return dyn::t2s_sequence(p, d, ts, ramsey); };
  const auto s = sweep_sequence(ctx, n, cfg.sweeps.t2_delay_max_s, make);
  write_sweep(ctx, "t2s", s);

  const double expected_rate = p.gamma_S / 2.0 + p.gamma_phi_S;
  json rep = {{"swap_duration_s", ts},
              {"ramsey_detuning_hz", cfg.sweeps.t2_ramsey_detuning_hz},
              {"expected_t2s_s", 1.0 / expected_rate},
              {"fit", nullptr}};
  rep["truncation"] = certify_truncation(ctx, make(cfg.sweeps.t2_delay_max_s));
  ctx.report["t2s"] = rep;
  if (s.delays.size() < 6) {
    throw DegenerateJacobian(fmt::format("t2s: {} delay(s) cannot constrain a fringe fit; populations written",
                                         s.delays.size()));
  }
  const auto est = fit::extract_oscillation_frequency(s.delays, s.p_e);
  const double t2 = 1.0 / est.fit[3];
  rep["fit"] = {{"fringe_frequency_hz", est.frequency}, {"decay_rate_per_s", est.fit[3]},
                {"t2s_s", t2}, {"amplitude", est.fit[0]}, {"converged", est.fit.converged}};
  ctx.report["t2s"] = rep;
  add_check(ctx, "ramsey_envelope_time_s", 1.0 / expected_rate, t2, 0.03, Check::Mode::Relative);
  ctx.result.summary.push_back(fmt::format("T2S = {:.1f} ns (coherence model {:.1f} ns), fringe {:.3f} MHz", t2 * 1e9,
                                           1e9 / expected_rate, est.frequency / 1e6));
}

// stark -----------------------------------------------------------------------

void stark(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& sw = cfg.sweeps;
  std::vector<double> amps = sw.stark_amplitudes_rad_per_s;
  if (ctx.opts.points) {
    const double top = *std::max_element(amps.begin(), amps.end());
    amps = *ctx.opts.points == 0 ? std::vector<double>{} : grid(0.0, top, *ctx.opts.points);
  }
  if (amps.empty()) throw InvalidInput("stark: empty amplitude grid");
  const double drive_det = hz_to_rad(sw.stark_drive_detuning_hz);

  std::vector<fit::StarkScan> scans;
  json per_g = json::array();
  double worst_calibration = 0.0;
  for (std::size_t k = 0; k < sw.stark_couplings_hz.size(); ++k) {
    auto p = cfg.system;
    p.omega_q = p.omega0p + hz_to_rad(cfg.stark_detuning_hz);
    p.g_c = hz_to_rad(sw.stark_couplings_hz[k]);
    const double chi = dyn::dispersive_chi(p.g_c, p.detuning(), p.eta);
    const auto pts = dyn::stark_scan(p, amps, drive_det);
    Table t{{"amplitude_rad_per_s", "n_mean", "shift_hz", "n_from_shift"}, {}};
    fit::StarkScan scan{p.g_c, {}};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double n_cal = pts[i].shift / (2.0 * chi);
      t.rows.push_back({amps[i], pts[i].n_mean, rad_to_hz(pts[i].shift), n_cal});
      scan.points.emplace_back(pts[i].n_mean, pts[i].shift);
      if (pts[i].n_mean > 0.0) worst_calibration = std::max(worst_calibration, rel_err(n_cal, pts[i].n_mean));
    }
    io::write_csv(ctx.dir / fmt::format("stark_scan_{}.csv", k), t);
    scans.push_back(scan);
    per_g.push_back({{"coupling_hz", sw.stark_couplings_hz[k]}, {"chi_hz", rad_to_hz(chi)},
                     {"g_over_delta", p.g_c / p.detuning()}, {"file", fmt::format("stark_scan_{}.csv", k)}});
  }
  ctx.report["stark"] = {{"detuning_hz", cfg.stark_detuning_hz}, {"scans", per_g},
                         {"max_calibration_relative_error", worst_calibration}};
  add_check(ctx, "phonon_number_calibration_max_error", 0.05, worst_calibration, 0.05, Check::Mode::UpperBound);

  const auto report = fit::stark_slope_analysis(scans);
  Table slopes{{"coupling_hz", "coupling_sq_hz2", "slope_hz_per_phonon", "slope_err_hz", "two_chi_hz",
                "relative_to_two_chi"}, {}};
  for (std::size_t k = 0; k < report.per_scan.size(); ++k) {
    const auto& s = report.per_scan[k];
    auto p = cfg.system;
    p.omega_q = p.omega0p + hz_to_rad(cfg.stark_detuning_hz);
    const double two_chi = 2.0 * dyn::dispersive_chi(s.coupling, p.detuning(), p.eta);
    const double g_hz = rad_to_hz(s.coupling);
    slopes.rows.push_back({g_hz, g_hz * g_hz, rad_to_hz(s.slope), rad_to_hz(s.slope_err), rad_to_hz(two_chi),
                           s.slope / two_chi - 1.0});
  }
  io::write_csv(ctx.dir / "stark_slopes.csv", slopes);
  ctx.report["stark"]["slope_coefficient_per_rad_s"] = report.c;
  for (std::size_t k = 1; k < report.per_scan.size(); ++k) {
    const double ratio = report.per_scan[k].slope / report.per_scan[0].slope;
    const double expected = std::pow(report.per_scan[k].coupling / report.per_scan[0].coupling, 2);
    add_check(ctx, fmt::format("stark_slope_ratio_{}_to_0", k), expected, ratio, 0.05, Check::Mode::Relative);
    ctx.result.summary.push_back(fmt::format("slope ratio g{}/g0 = {:.4f} (expected {:.4f})", k, ratio, expected));
  }
}

// dispatch --------------------------------------------------------------------

using Body = void (*)(Context&);

const std::map<std::string, Body>& bodies() {
  static const std::map<std::string, Body> table = {
      {"saw-response", saw_response}, {"coupling-map", coupling_map}, {"chevron", chevron},
      {"t1s", t1s},                   {"t2s", t2s},                   {"stark", stark}};
  return table;
}

void prepare_directory(const fs::path& dir) {
  if (dir.empty()) throw InvalidInput("--out: output directory required");
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw InvalidInput(fmt::format("--out: {} is not a directory", dir.string()));
    if (!fs::is_empty(dir)) throw InvalidInput(fmt::format("--out: {} is not empty", dir.string()));
  }
  fs::create_directories(dir);
}

manifest::RunManifest start_manifest(const std::string& name, const std::string& config_text,
                                     const DeviceConfig& cfg, const RunOptions& opts) {
  manifest::RunManifest m;
  m.command = name;
  m.config_text = config_text;
  m.config_sha256 = manifest::sha256_hex(config_text);
  m.seed = opts.seed.value_or(cfg.seed);
  if (opts.seed) m.options["seed"] = std::to_string(*opts.seed);
  if (opts.points) m.options["points"] = std::to_string(*opts.points);
  if (opts.s11_input) m.options["s11"] = fs::absolute(*opts.s11_input).string();
  m.started_utc = manifest::utc_now();
  return m;
}

void finish_manifest(const fs::path& dir, manifest::RunManifest& m, const std::vector<Check>& checks) {
  for (const auto& c : checks) m.tolerances[c.name] = c.tolerance;
  m.finished_utc = manifest::utc_now();
  m.outputs = manifest::inventory(dir);
  manifest::write_manifest(dir, m);
}

json checks_json(const std::vector<Check>& checks) {
  json out = json::array();
  for (const auto& c : checks) {
    const char* mode = c.mode == Check::Mode::Relative ? "relative" : c.mode == Check::Mode::Absolute ? "absolute"
                                                                                                       : "upper_bound";
    out.push_back({{"name", c.name}, {"reference", c.reference}, {"computed", c.computed},
                   {"tolerance", c.tolerance}, {"mode", mode}, {"pass", c.pass}});
  }
  return out;
}

CommandResult run_single(const std::string& name, const std::string& config_text, const DeviceConfig& cfg,
                         const RunOptions& opts) {
  const auto it = bodies().find(name);
  if (it == bodies().end()) throw InvalidInput("unknown command: " + name);
  prepare_directory(opts.out_dir);
  auto m = start_manifest(name, config_text, cfg, opts);
  Context ctx{cfg, opts, opts.out_dir, json::object(), {}, {}};
  ctx.report["command"] = name;
  try {
    it->second(ctx);
  } catch (const NumericalError& e) {
    ctx.result.exit_code = 4;
    ctx.result.error = fmt::format("{}: {}", error_kind(e), e.what());
    ctx.report["error"] = {{"kind", error_kind(e)}, {"message", e.what()}};
    ctx.result.summary.push_back("numerical failure: " + ctx.result.error);
  }
  ctx.report["checks"] = checks_json(ctx.result.checks);
  io::write_text(ctx.dir / "report.json", ctx.report.dump(2) + "\n");
  finish_manifest(ctx.dir, m, ctx.result.checks);
  return ctx.result;
}

CommandResult reproduce_all(const std::string& config_text, const DeviceConfig& cfg, const RunOptions& opts) {
  prepare_directory(opts.out_dir);
  auto m = start_manifest("reproduce-all", config_text, cfg, opts);
  CommandResult total;
  json rows = json::array();
  for (const auto& [name, body] : bodies()) {
    (void)body;
    RunOptions sub = opts;
    sub.out_dir = opts.out_dir / name;
    sub.points.reset();
    sub.s11_input.reset();
    const auto r = run_single(name, config_text, cfg, sub);
    if (r.exit_code != 0) {
      total.checks.push_back(make_check(name + "_pipeline", 0.0, 1.0, 0.0, Check::Mode::UpperBound));
      total.summary.push_back(fmt::format("{}: {}", name, r.error));
    }
    for (const auto& c : r.checks) {
      total.checks.push_back(c);
      total.checks.back().name = name + "/" + c.name;
    }
  }
  std::size_t failed = 0;
  for (const auto& c : total.checks) failed += c.pass ? 0 : 1;
  total.exit_code = failed ? 3 : 0;
  const std::string table = format_checks(total.checks);
  io::write_text(opts.out_dir / "summary.txt", table);
  json summary = {{"command", "reproduce-all"}, {"checks", checks_json(total.checks)},
                  {"failed", failed}, {"total", total.checks.size()}};
  io::write_text(opts.out_dir / "summary.json", summary.dump(2) + "\n");
  finish_manifest(opts.out_dir, m, total.checks);
  total.summary.push_back(fmt::format("{} of {} checks passed", total.checks.size() - failed, total.checks.size()));
  return total;
}

void collect_manifests(const fs::path& root, const fs::path& dir, std::map<std::string, manifest::RunManifest>& out) {
  const auto file = dir / std::string(manifest::kManifestName);
  if (fs::exists(file)) out[fs::relative(dir, root).generic_string()] = manifest::read_manifest(file);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) collect_manifests(root, entry.path(), out);
  }
}

}  // namespace

Check make_check(std::string name, double reference, double computed, double tolerance, Check::Mode mode) {
  Check c{std::move(name), reference, computed, tolerance, mode, false};
  switch (mode) {
    case Check::Mode::Relative:
      c.pass = std::isfinite(computed) && rel_err(computed, reference) <= tolerance;
      break;
    case Check::Mode::Absolute:
      c.pass = std::isfinite(computed) && std::abs(computed - reference) <= tolerance;
      break;
    case Check::Mode::UpperBound:
      c.pass = std::isfinite(computed) && computed <= tolerance;
      break;
  }
  return c;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"saw-response", "coupling-map", "chevron", "t1s",
                                                 "t2s",          "stark",        "reproduce-all"};
  return names;
}

CommandResult run_command(const std::string& name, const std::string& config_text, const RunOptions& opts) {
  const DeviceConfig cfg = config::parse_config(config_text);
  if (name == "reproduce-all") return reproduce_all(config_text, cfg, opts);
  return run_single(name, config_text, cfg, opts);
}

CommandResult rerun(const fs::path& manifest_path, const fs::path& out_dir) {
  const auto original = manifest::read_manifest(manifest_path);
  RunOptions opts;
  opts.out_dir = out_dir;
  if (auto it = original.options.find("seed"); it != original.options.end()) opts.seed = std::stoull(it->second);
  if (auto it = original.options.find("points"); it != original.options.end()) opts.points = std::stoull(it->second);
  if (auto it = original.options.find("s11"); it != original.options.end()) opts.s11_input = it->second;
  CommandResult result = run_command(original.command, original.config_text, opts);

  std::map<std::string, manifest::RunManifest> before, after;
  const fs::path source = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
  collect_manifests(source, source, before);
  collect_manifests(out_dir, out_dir, after);
  std::size_t compared = 0, mismatched = 0;
  for (const auto& [rel, m] : before) {
    const auto other = after.find(rel);
    std::map<std::string, std::string> fresh;
    if (other != after.end()) {
      for (const auto& e : other->second.outputs) fresh[e.path] = e.sha256;
    }
    for (const auto& e : m.outputs) {
      ++compared;
      const std::string shown = rel == "." ? e.path : rel + "/" + e.path;
      const auto f = fresh.find(e.path);
      if (f == fresh.end()) {
        ++mismatched;
        result.summary.push_back("missing: " + shown);
      } else if (f->second != e.sha256) {
        ++mismatched;
        result.summary.push_back("hash differs: " + shown);
      }
    }
  }
  result.summary.push_back(fmt::format("rerun: {} of {} output hashes reproduced", compared - mismatched, compared));
  if (mismatched) result.exit_code = 3;
  return result;
}

std::string format_checks(const std::vector<Check>& checks) {
  std::string out = fmt::format("{:<52} {:>14} {:>14} {:>10} {:>12} {}\n", "check", "reference", "computed",
                                "tolerance", "mode", "result");
  for (const auto& c : checks) {
    const char* mode = c.mode == Check::Mode::Relative ? "relative" : c.mode == Check::Mode::Absolute ? "absolute"
                                                                                                       : "max";
    out += fmt::format("{:<52} {:>14.6g} {:>14.6g} {:>10.3g} {:>12} {}\n", c.name, c.reference, c.computed,
                       c.tolerance, mode, c.pass ? "PASS" : "FAIL");
  }
  return out;
}

}  // namespace qad::pipe
