#pragma once
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "admr/bloch.hpp"
#include "admr/cavity.hpp"
#include "admr/errors.hpp"
#include "admr/spectrum.hpp"

namespace admr {

// Flat key=value configuration with '#' comments and dotted namespaces.
// Every key has a default; file values override defaults; --set overrides
// file values. Values are kept as strings so the resolved echo reproduces
// exactly what was given.
class RunConfig {
 public:
  RunConfig() : values_(defaults()) {}

  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"cavity.r1", "0.948"},
        {"cavity.r2", "0.998"},
        {"sample.nv_ppb", "0.16"},
        {"sample.sigma_nv_mm2", "3.1e-15"},
        {"sample.path_length_mm", "2.6"},
        {"sample.alpha0_abs", "0.0781"},
        {"sample.alpha_r", "0.006"},
        {"sample.epsilon_khz_per_w", "75"},
        {"rates.k31", "65.9"},
        {"rates.k42", "65.9"},
        {"rates.k35", "10.0"},
        {"rates.k45", "53.3"},
        {"rates.k51", "4.4"},
        {"rates.k52", "2.2"},
        {"rates.gamma1_khz", "0.182"},
        {"rates.gamma2_star_mhz", "0.33333333333333331"},
        {"drive.omega_mhz", "0.3"},
        {"drive.p_in_w", "0.4"},
        {"lockin.delta_mod_mhz", "nan"},
        {"lockin.a_par_mhz", "2.16"},
        {"lockin.gain_v0", "65000000"},
        {"lockin.tones", "three"},
        {"lockin.channel", "transmit"},
        {"spectrum.delta_min_mhz", "-8"},
        {"spectrum.delta_max_mhz", "8"},
        {"spectrum.points", "1601"},
        {"slope_map.p_in_min_w", "0.05"},
        {"slope_map.p_in_max_w", "0.8"},
        {"slope_map.p_in_points", "16"},
        {"slope_map.omega_min_mhz", "0.05"},
        {"slope_map.omega_max_mhz", "1.0"},
        {"slope_map.omega_points", "16"},
        {"sense.channel", "reflect"},
        {"sense.r2", "0.999"},
        {"sense.fixed", "p_in"},
        {"sense.p_in_w", "0.5"},
        {"sense.omega_mhz", "0.5"},
        {"sense.ppb_min", "1"},
        {"sense.ppb_max", "1000"},
        {"sense.ppb_points", "25"},
        {"sense.p_in_min_w", "0.05"},
        {"sense.p_in_max_w", "1.0"},
        {"sense.p_in_points", "20"},
        {"sense.omega_min_mhz", "0.05"},
        {"sense.omega_max_mhz", "1.0"},
        {"sense.omega_points", "20"},
        {"optimize.rounds", "3"},
        {"optimize.refine", "10"},
        {"noise.resolution_hz", "0.24"},
        {"allan.tau_min_s", "nan"},
        {"allan.tau_max_s", "nan"},
        {"allan.points", "40"},
        {"synth.kind", "white"},
        {"synth.unit", "volts"},
        {"synth.asd", "1e-06"},
        {"synth.drift_per_s", "0"},
        {"synth.amplitude", "1e-06"},
        {"synth.freq_hz", "10"},
        {"synth.sample_rate_hz", "1000"},
        {"synth.length", "100000"},
        {"constants.gamma_e_hz_per_t", "28024000000"},
        {"constants.wavelength_nm", "532"},
        {"constants.n_c_mm3", "1.76e+20"},
        {"constants.d_zfs_hz", "2870000000"},
        {"run.seed", "12345"},
        {"run.threads", "0"},
    };
    return d;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      apply_line(line, path + ":" + std::to_string(lineno));
    }
  }

  // "key=value" from the command line
  void set(const std::string& assignment) { apply_line(assignment, "--set " + assignment); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw config_error("unknown config key '" + key + "'");
    return it->second;
  }

  double getd(const std::string& key) const {
    const std::string& s = raw(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw config_error("config key '" + key + "' is not a number: '" + s + "'");
    return v;
  }

  long geti(const std::string& key) const {
    const double v = getd(key);
    const long n = std::lround(v);
    if (double(n) != v) throw config_error("config key '" + key + "' is not an integer");
    return n;
  }

  const std::string& gets(const std::string& key) const { return raw(key); }

  // resolved configuration as '#'-prefixed lines, sorted by key
  std::string echo() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << "# " << k << "=" << v << "\n";
    return os.str();
  }

  RateSet<double> rates() const {
    RateSet<double> r;
    r.k31 = getd("rates.k31");
    r.k42 = getd("rates.k42");
    r.k35 = getd("rates.k35");
    r.k45 = getd("rates.k45");
    r.k51 = getd("rates.k51");
    r.k52 = getd("rates.k52");
    r.gamma1 = getd("rates.gamma1_khz");
    r.gamma2_star = getd("rates.gamma2_star_mhz");
    if (!rates_admissible(r)) throw config_error("rate set violates its invariants");
    return r;
  }

  DiamondSample<double> sample() const {
    DiamondSample<double> s;
    s.nv_ppb = getd("sample.nv_ppb");
    s.sigma_nv = getd("sample.sigma_nv_mm2");
    s.path_length_l = getd("sample.path_length_mm");
    s.alpha0_abs = getd("sample.alpha0_abs");
    s.alpha_r = getd("sample.alpha_r");
    s.epsilon = getd("sample.epsilon_khz_per_w");
    s.n_carbon = getd("constants.n_c_mm3");
    return s;
  }

  CavityConfig<double> cavity() const {
    CavityConfig<double> c;
    c.mirrors.r1 = getd("cavity.r1");
    c.mirrors.r2 = getd("cavity.r2");
    c.sample = sample();
    return c;
  }

  LockinConfig<double> lockin() const {
    LockinConfig<double> l;
    l.delta_mod = getd("lockin.delta_mod_mhz");
    l.a_par = getd("lockin.a_par_mhz");
    l.gain_v0 = getd("lockin.gain_v0");
    l.channel = channel_from_string(gets("lockin.channel"));
    const std::string& tones = gets("lockin.tones");
    if (tones == "three") {
      l.ml_set = {-1, 0, 1};
      l.mx_set = {-1, 0, 1};
    } else if (tones == "single") {
      l.ml_set = {-1, 0, 1};
      l.mx_set = {0};
    } else {
      throw config_error("lockin.tones must be 'three' or 'single'");
    }
    return l;
  }

 private:
  void apply_line(const std::string& raw_line, const std::string& where) {
    std::string line = raw_line;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const char* ws = " \t\r\n";
      const size_t a = s.find_first_not_of(ws);
      if (a == std::string::npos) return std::string();
      const size_t b = s.find_last_not_of(ws);
      return s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) return;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw config_error(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw config_error(where + ": empty key");
    if (!values_.count(key)) throw config_error(where + ": unknown config key '" + key + "'");
    values_[key] = value;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace admr
