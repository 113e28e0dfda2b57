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

#include "qad/config.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "qad/constants.hpp"
#include "qad/diagnostics.hpp"
#include "qad/trace_io.hpp"

namespace qad::config {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Typed access to the INI tree that remembers every key it was asked about,
// so leftovers can be reported as unknown.
class Reader {
 public:
  explicit Reader(pt::ptree tree) : tree_(std::move(tree)) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    known_.insert(section + "." + key);
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto value = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!value) return std::nullopt;
    return trim(*value);
  }

  std::optional<double> opt_number(const std::string& section, const std::string& key) {
    const auto text = raw(section, key);
    if (!text) return std::nullopt;
    return parse_number(section + "." + key, *text);
  }

  double number(const std::string& section, const std::string& key, double fallback) {
    return opt_number(section, key).value_or(fallback);
  }

  long long integer(const std::string& section, const std::string& key, long long fallback) {
    const auto text = raw(section, key);
    if (!text) return fallback;
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
    if (ec != std::errc() || ptr != text->data() + text->size()) {
      throw ConfigError(section + "." + key, fmt::format("expected an integer, got '{}'", *text));
    }
    return v;
  }

  std::size_t count(const std::string& section, const std::string& key, std::size_t fallback,
                    std::size_t minimum) {
    const long long v = integer(section, key, static_cast<long long>(fallback));
    if (v < static_cast<long long>(minimum)) {
      throw ConfigError(section + "." + key, fmt::format("must be >= {}, got {}", minimum, v));
    }
    return static_cast<std::size_t>(v);
  }

  std::vector<double> list(const std::string& section, const std::string& key, std::vector<double> fallback) {
    const auto text = raw(section, key);
    if (!text) return fallback;
    std::vector<double> out;
    std::istringstream in(*text);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(parse_number(section + "." + key, item));
    }
    return out;
  }

  std::string text(const std::string& section, const std::string& key, std::string fallback) {
    return raw(section, key).value_or(std::move(fallback));
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError(section, "key outside of any [section]");
      }
      for (const auto& [key, value] : body) {
        const std::string path = section + "." + key;
        if (!known_.count(path)) throw ConfigError(path, "unknown key");
      }
    }
  }

 private:
  static double parse_number(const std::string& path, const std::string& text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw ConfigError(path, fmt::format("expected a finite number, got '{}'", text));
    }
    return v;
  }

  pt::ptree tree_;
  std::set<std::string> known_;
};

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

// Magnitude window that catches values entered in the wrong unit.
void plausible(double v, double lo, double hi, const std::string& path, const std::string& unit) {
  require(v > 0, path, "must be > 0");
  require(v >= lo && v <= hi, path,
          fmt::format("{:g} is outside [{:g}, {:g}] {}; check the unit", v, lo, hi, unit));
}

}  // namespace

double DeviceConfig::swap_time() const { return swap_duration_s.value_or(dyn::swap_duration(system)); }

DeviceConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}", e.line()), e.message());
  }
  Reader r(std::move(tree));
  DeviceConfig cfg;

  // [saw]
  auto& g = cfg.geometry;
  g.electrode_width = r.number("saw", "electrode_width_m", g.electrode_width);
  plausible(g.electrode_width, 1e-9, 1e-3, "saw.electrode_width_m", "m");
  g.pitch = 4.0 * g.electrode_width;
  g.idt_cells = static_cast<int>(r.count("saw", "idt_cells", g.idt_cells, 1));
  g.mirror_cells = static_cast<int>(r.count("saw", "mirror_cells", g.mirror_cells, 1));
  g.mirror_separation = r.number("saw", "mirror_separation_wavelengths", g.mirror_separation);
  require(g.mirror_separation > 0, "saw.mirror_separation_wavelengths", "must be > 0");
  g.velocity = r.number("saw", "velocity_m_per_s", g.velocity);
  plausible(g.velocity, 100.0, 2e4, "saw.velocity_m_per_s", "m/s");
  const double r_abs = r.number("saw", "electrode_reflection_abs", std::abs(g.electrode_reflection));
  const double r_phase = r.number("saw", "electrode_reflection_phase_rad", std::arg(g.electrode_reflection));
  require(r_abs >= 0 && r_abs < 1, "saw.electrode_reflection_abs", "must lie in [0, 1)");
  g.electrode_reflection = std::polar(r_abs, r_phase);
  g.coupling_k2 = r.number("saw", "coupling_k2", g.coupling_k2);
  require(g.coupling_k2 > 0 && g.coupling_k2 < 1, "saw.coupling_k2", "must lie in (0, 1)");
  g.static_capacitance = r.number("saw", "static_capacitance_f", g.static_capacitance);
  plausible(g.static_capacitance, 1e-18, 1e-9, "saw.static_capacitance_f", "F");
  if (auto gp = r.opt_number("saw", "peak_conductance_s")) {
    require(*gp > 0, "saw.peak_conductance_s", "must be > 0");
    g.peak_conductance = *gp;
  }

  // [bvd]
  const double l_s = r.number("bvd", "motional_inductance_h", 186e-9);
  plausible(l_s, 1e-12, 1e-3, "bvd.motional_inductance_h", "H");
  const double q = r.number("bvd", "quality_factor", 1643.0);
  require(q > 0, "bvd.quality_factor", "must be > 0");
  const auto c_s = r.opt_number("bvd", "motional_capacitance_f");
  const auto f_res = r.opt_number("bvd", "resonance_hz");
  require(!(c_s && f_res), "bvd.motional_capacitance_f", "give either motional_capacitance_f or resonance_hz");
  if (f_res) {
    plausible(*f_res, 1e6, 1e12, "bvd.resonance_hz", "Hz");
    const double c = 1.0 / (std::pow(kTwoPi * *f_res, 2) * l_s);
    cfg.bvd = saw::BvdParams::from_quality(l_s, c, q, g.static_capacitance);
    cfg.bvd_resonance_given = true;
  } else {
    const double c = c_s.value_or(8e-15);
    plausible(c, 1e-21, 1e-9, "bvd.motional_capacitance_f", "F");
    cfg.bvd = saw::BvdParams::from_quality(l_s, c, q, g.static_capacitance);
  }
  cfg.reference_impedance = r.number("bvd", "reference_impedance_ohm", 50.0);
  require(cfg.reference_impedance > 0, "bvd.reference_impedance_ohm", "must be > 0");

  // [transmon]
  auto& t = cfg.transmon;
  t.shunt_capacitance = r.number("transmon", "shunt_capacitance_f", t.shunt_capacitance);
  plausible(t.shunt_capacitance, 1e-18, 1e-9, "transmon.shunt_capacitance_f", "F");
  t.charging_energy = r.opt_number("transmon", "charging_energy_hz")
                          .value_or(circuit::ec_from_capacitance(t.shunt_capacitance));
  plausible(t.charging_energy, 1e3, 1e12, "transmon.charging_energy_hz", "Hz");
  t.max_josephson_energy = r.number("transmon", "max_josephson_energy_hz", t.max_josephson_energy);
  plausible(t.max_josephson_energy, 1e3, 1e13, "transmon.max_josephson_energy_hz", "Hz");
  t.flux_ratio = r.number("transmon", "flux_ratio", t.flux_ratio);

  // [gmon]
  auto& gm = cfg.ledger.gmon;
  gm.l_g = r.number("gmon", "l_g_henry", gm.l_g);
  plausible(gm.l_g, 1e-15, 1e-3, "gmon.l_g_henry", "H");
  gm.l_f = r.number("gmon", "l_f_henry", gm.l_f);
  plausible(gm.l_f, 1e-15, 1e-3, "gmon.l_f_henry", "H");
  gm.l_c0 = r.number("gmon", "l_c0_henry", gm.l_c0);
  plausible(gm.l_c0, 1e-15, 1e-3, "gmon.l_c0_henry", "H");
  gm.delta = r.number("gmon", "delta_rad", gm.delta);
  if (auto beta = r.opt_number("gmon", "loop_beta")) {
    require(*beta >= 0, "gmon.loop_beta", "must be >= 0");
    cfg.loop_beta = *beta;
  }

  // [coupling]
  cfg.ledger.l_j = r.number("coupling", "l_j_henry", cfg.ledger.l_j);
  plausible(cfg.ledger.l_j, 1e-15, 1e-3, "coupling.l_j_henry", "H");
  cfg.ledger.l_s = l_s;
  const double saw_hz = r.number("coupling", "saw_frequency_hz", 3.901e9);
  plausible(saw_hz, 1e6, 1e12, "coupling.saw_frequency_hz", "Hz");
  cfg.ledger.omega0p = hz_to_rad(saw_hz);
  if (cfg.bvd_resonance_given) {
    const double mismatch = std::abs(saw_hz - cfg.bvd.resonance) / cfg.bvd.resonance;
    require(mismatch <= 0.01, "coupling.saw_frequency_hz",
            fmt::format("differs from bvd.resonance_hz by {:.2f}% (limit 1%)", 100 * mismatch));
  }

  // [system]
  auto& s = cfg.system;
  cfg.coupling_override_hz = r.opt_number("system", "coupling_hz");
  cfg.idle_detuning_hz = r.number("system", "idle_detuning_hz", cfg.idle_detuning_hz);
  require(cfg.idle_detuning_hz != 0.0, "system.idle_detuning_hz", "must be nonzero");
  cfg.stark_detuning_hz = r.number("system", "stark_detuning_hz", cfg.stark_detuning_hz);
  require(cfg.stark_detuning_hz != 0.0, "system.stark_detuning_hz", "must be nonzero");
  const double eta_hz = r.number("system", "anharmonicity_hz", t.anharmonicity());
  require(eta_hz <= 0, "system.anharmonicity_hz", "must be <= 0");
  auto positive_time = [&](const std::string& key, double fallback) {
    const double v = r.number("system", key, fallback);
    plausible(v, 1e-15, 1.0, "system." + key, "s");
    return v;
  };
  const double t1_idle = positive_time("qubit_t1_idle_s", 452e-9);
  const double t1_swap = positive_time("qubit_t1_swap_s", 1881e-9);
  const double t1_phonon = positive_time("phonon_t1_s", 205e-9);
  const auto t2_qubit = r.opt_number("system", "qubit_t2_s");
  const auto t2_phonon = r.opt_number("system", "phonon_t2_s");
  if (t2_qubit) plausible(*t2_qubit, 1e-15, 1.0, "system.qubit_t2_s", "s");
  if (t2_phonon) plausible(*t2_phonon, 1e-15, 1.0, "system.phonon_t2_s", "s");
  s.omega0p = cfg.ledger.omega0p;
  s.omega_q = s.omega0p + hz_to_rad(cfg.idle_detuning_hz);
  s.eta = hz_to_rad(eta_hz);
  s.gamma_q_idle = 1.0 / t1_idle;
  s.gamma_q_swap = 1.0 / t1_swap;
  s.gamma_S = 1.0 / t1_phonon;
  s.gamma_phi_q = t2_qubit ? dyn::pure_dephasing_rate(t1_idle, *t2_qubit) : 0.0;
  s.gamma_phi_S = t2_phonon ? dyn::pure_dephasing_rate(t1_phonon, *t2_phonon) : 0.0;
  s.n_max = static_cast<int>(r.count("system", "fock_cutoff", 2, 2));
  const auto levels = r.integer("system", "transmon_levels", 3);
  require(levels == 2 || levels == 3, "system.transmon_levels", "must be 2 or 3");
  s.q_levels = static_cast<int>(levels);
  if (auto ts = r.opt_number("system", "swap_duration_s")) {
    plausible(*ts, 1e-15, 1.0, "system.swap_duration_s", "s");
    cfg.swap_duration_s = *ts;
  }
  if (cfg.coupling_override_hz) {
    s.g_c = hz_to_rad(*cfg.coupling_override_hz);
  } else {
    try {
      s.g_c = circuit::coupling_strength(cfg.ledger);
    } catch (const NumericalError& e) {
      throw ConfigError("gmon.delta_rad", e.what());
    }
  }
  require(s.g_c != 0.0 || cfg.swap_duration_s.has_value(), "system.coupling_hz",
          "zero coupling needs an explicit swap_duration_s");

  // [sweeps]
  auto& w = cfg.sweeps;
  w.saw_f_min_hz = r.number("sweeps", "saw_f_min_hz", w.saw_f_min_hz);
  w.saw_f_max_hz = r.number("sweeps", "saw_f_max_hz", w.saw_f_max_hz);
  require(w.saw_f_min_hz > 0, "sweeps.saw_f_min_hz", "must be > 0");
  require(w.saw_f_max_hz > w.saw_f_min_hz, "sweeps.saw_f_max_hz", "must exceed saw_f_min_hz");
  w.saw_points = r.count("sweeps", "saw_points", w.saw_points, 2);
  w.bvd_span_linewidths = r.number("sweeps", "bvd_span_linewidths", w.bvd_span_linewidths);
  require(w.bvd_span_linewidths > 0, "sweeps.bvd_span_linewidths", "must be > 0");
  w.bvd_points = r.count("sweeps", "bvd_points", w.bvd_points, 2);
  w.s11_noise = r.number("sweeps", "s11_noise", w.s11_noise);
  require(w.s11_noise >= 0, "sweeps.s11_noise", "must be >= 0");
  w.bias_min_rad = r.number("sweeps", "bias_min_rad", w.bias_min_rad);
  w.bias_max_rad = r.number("sweeps", "bias_max_rad", w.bias_max_rad);
  require(w.bias_max_rad >= w.bias_min_rad, "sweeps.bias_max_rad", "must be >= bias_min_rad");
  w.bias_points = r.count("sweeps", "bias_points", w.bias_points, 1);
  w.chevron_coupling_hz = r.number("sweeps", "chevron_coupling_hz", w.chevron_coupling_hz);
  require(w.chevron_coupling_hz != 0, "sweeps.chevron_coupling_hz", "must be nonzero");
  w.chevron_span_hz = r.number("sweeps", "chevron_span_hz", w.chevron_span_hz);
  require(w.chevron_span_hz >= 0, "sweeps.chevron_span_hz", "must be >= 0");
  w.chevron_detunings = r.count("sweeps", "chevron_detunings", w.chevron_detunings, 1);
  w.chevron_t_max_s = r.number("sweeps", "chevron_t_max_s", w.chevron_t_max_s);
  plausible(w.chevron_t_max_s, 1e-12, 1e-3, "sweeps.chevron_t_max_s", "s");
  w.chevron_times = r.count("sweeps", "chevron_times", w.chevron_times, 2);
  w.t1_delay_max_s = r.number("sweeps", "t1_delay_max_s", w.t1_delay_max_s);
  plausible(w.t1_delay_max_s, 1e-12, 1e-3, "sweeps.t1_delay_max_s", "s");
  w.t1_points = r.count("sweeps", "t1_points", w.t1_points, 1);
  w.t2_delay_max_s = r.number("sweeps", "t2_delay_max_s", w.t2_delay_max_s);
  plausible(w.t2_delay_max_s, 1e-12, 1e-3, "sweeps.t2_delay_max_s", "s");
  w.t2_points = r.count("sweeps", "t2_points", w.t2_points, 1);
  w.t2_ramsey_detuning_hz = r.number("sweeps", "t2_ramsey_detuning_hz", w.t2_ramsey_detuning_hz);
  w.stark_amplitudes_rad_per_s = r.list("sweeps", "stark_amplitudes_rad_per_s", w.stark_amplitudes_rad_per_s);
  require(!w.stark_amplitudes_rad_per_s.empty(), "sweeps.stark_amplitudes_rad_per_s", "must not be empty");
  for (double a : w.stark_amplitudes_rad_per_s) {
    require(a >= 0, "sweeps.stark_amplitudes_rad_per_s", "amplitudes must be >= 0");
  }
  w.stark_couplings_hz = r.list("sweeps", "stark_couplings_hz", w.stark_couplings_hz);
  require(!w.stark_couplings_hz.empty(), "sweeps.stark_couplings_hz", "must not be empty");
  for (double c : w.stark_couplings_hz) require(c != 0, "sweeps.stark_couplings_hz", "couplings must be nonzero");
  w.stark_drive_detuning_hz = r.number("sweeps", "stark_drive_detuning_hz", w.stark_drive_detuning_hz);

  // [integrator]
  auto& io = cfg.integrator.sequence;
  const std::string method = r.text("integrator", "method", "adaptive");
  require(method == "adaptive" || method == "rk4", "integrator.method", "must be 'adaptive' or 'rk4'");
  io.integrator.method = method == "rk4" ? dyn::IntegratorOptions::Method::FixedRK4
                                         : dyn::IntegratorOptions::Method::Adaptive;
  io.integrator.rtol = r.number("integrator", "rtol", io.integrator.rtol);
  require(io.integrator.rtol > 0, "integrator.rtol", "must be > 0");
  io.integrator.atol = r.number("integrator", "atol", io.integrator.atol);
  require(io.integrator.atol > 0, "integrator.atol", "must be > 0");
  io.integrator.fixed_step = r.number("integrator", "fixed_step_s", io.integrator.fixed_step);
  plausible(io.integrator.fixed_step, 1e-15, 1e-6, "integrator.fixed_step_s", "s");
  io.samples_per_segment = static_cast<int>(r.count("integrator", "samples_per_segment", 4, 1));

  // [output]
  cfg.output_directory = r.text("output", "directory", cfg.output_directory.string());
  require(!cfg.output_directory.empty(), "output.directory", "must not be empty");
  const long long seed = r.integer("output", "seed", 0);
  require(seed >= 0, "output.seed", "must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);

  r.reject_unknown();
  return cfg;
}

DeviceConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const InvalidInput& e) {
    throw ConfigError("--config", e.what());
  }
  return parse_config(text);
}

}  // namespace qad::config
