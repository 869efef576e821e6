#include <cmath>
#include <cstdlib>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "admr/bloch.hpp"
#include "admr/cavity.hpp"
#include "admr/config.hpp"
#include "admr/io.hpp"
#include "admr/noise.hpp"
#include "admr/optimize.hpp"
#include "admr/sensitivity.hpp"
#include "admr/spectrum.hpp"

namespace {

using namespace admr;

constexpr const char* sweep_columns =
    "nv_ppb,p_in_w,omega_mhz,eta_t_per_rthz,finesse,p_cav_w,p_detected_w,r1";

struct SenseSetup {
  RefineAxis ppb, p_in, omega;
  double r2 = 0.999;
  Channel channel = Channel::reflect;
};

SenseSetup sense_setup(const RunConfig& cfg) {
  SenseSetup s;
  s.r2 = cfg.getd("sense.r2");
  s.channel = channel_from_string(cfg.gets("sense.channel"));

  auto ppb_axis = [&] {
    return RefineAxis::logarithmic(cfg.getd("sense.ppb_min"), cfg.getd("sense.ppb_max"),
                                   cfg.geti("sense.ppb_points"));
  };
  auto p_in_axis = [&] {
    return RefineAxis::linear(cfg.getd("sense.p_in_min_w"), cfg.getd("sense.p_in_max_w"),
                              cfg.geti("sense.p_in_points"));
  };
  auto omega_axis = [&] {
    return RefineAxis::linear(cfg.getd("sense.omega_min_mhz"), cfg.getd("sense.omega_max_mhz"),
                              cfg.geti("sense.omega_points"));
  };

  const std::string& fixed = cfg.gets("sense.fixed");
  if (fixed == "p_in") {
    s.ppb = ppb_axis();
    s.p_in = RefineAxis::fixed(cfg.getd("sense.p_in_w"));
    s.omega = omega_axis();
  } else if (fixed == "omega") {
    s.ppb = ppb_axis();
    s.p_in = p_in_axis();
    s.omega = RefineAxis::fixed(cfg.getd("sense.omega_mhz"));
  } else if (fixed == "nv_ppb") {
    s.ppb = RefineAxis::fixed(cfg.getd("sample.nv_ppb"));
    s.p_in = p_in_axis();
    s.omega = omega_axis();
  } else if (fixed == "none") {
    s.ppb = ppb_axis();
    s.p_in = p_in_axis();
    s.omega = omega_axis();
  } else {
    throw config_error("sense.fixed must be one of p_in|omega|nv_ppb|none");
  }
  return s;
}

std::vector<SensitivityPoint<double>> run_sweep(const SenseSetup& s, const Eigen::VectorXd& ppb,
                                                const Eigen::VectorXd& p_in,
                                                const Eigen::VectorXd& omega, const RunConfig& cfg) {
  SweepGrid<double> grid;
  grid.nv_ppb_values = ppb;
  grid.p_in_values = p_in;
  grid.omega_values = omega;
  grid.fixed = cfg.gets("sense.fixed");
  const ShotNoiseConstants<double> pc{cfg.getd("constants.gamma_e_hz_per_t"),
                                      cfg.getd("constants.wavelength_nm")};
  return sweep(grid, cfg.rates(), s.r2, s.channel, cfg.sample(), pc,
               static_cast<unsigned>(cfg.geti("run.threads")));
}

void append_point_rows(CsvFile& csv, const std::vector<SensitivityPoint<double>>& pts) {
  for (const auto& p : pts)
    csv.row({p.nv_ppb, p.p_in, p.omega, p.eta, p.finesse, p.p_cav, p.p_detected, p.r1_matched});
}

int cmd_spectrum(const RunConfig& cfg, const std::string& out) {
  const auto cav = cfg.cavity();
  const auto rates = cfg.rates();
  const auto lock = cfg.lockin();
  const double omega = cfg.getd("drive.omega_mhz");
  const double p_in = cfg.getd("drive.p_in_w");
  const long n = cfg.geti("spectrum.points");
  if (n < 1) throw config_error("spectrum.points must be >= 1");
  const Eigen::VectorXd deltas = Eigen::VectorXd::LinSpaced(
      n, cfg.getd("spectrum.delta_min_mhz"), cfg.getd("spectrum.delta_max_mhz"));

  const SpectrumResult<double> spec = lockin_spectrum(deltas, cav, rates, omega, p_in, lock);

  CsvFile csv(cfg.echo());
  csv.comment("delta_mod_used_mhz=" + fmt17(spec.delta_mod_used) +
              " gamma_p_mhz=" + fmt17(spec.gamma_p) + " gamma2_mhz=" + fmt17(spec.gamma2));
  csv.header("delta_mhz,signal_v");
  for (Eigen::Index i = 0; i < deltas.size(); ++i) csv.row({spec.detunings(i), spec.signal(i)});
  csv.write(out);
  return 0;
}

int cmd_slope_map(const RunConfig& cfg, const std::string& out) {
  const auto cav = cfg.cavity();
  const auto rates = cfg.rates();
  auto lock = cfg.lockin();
  // the modulation depth is an instrument setting: resolve it once at the
  // configured drive operating point and hold it fixed across the whole map
  if (std::isnan(lock.delta_mod))
    lock.delta_mod = resolve_delta_mod(lock, cav, rates, cfg.getd("drive.p_in_w"));
  const long np = cfg.geti("slope_map.p_in_points");
  const long nw = cfg.geti("slope_map.omega_points");
  if (np < 1 || nw < 1) throw config_error("slope_map grid needs at least one point per axis");
  const Eigen::VectorXd p_axis = Eigen::VectorXd::LinSpaced(np, cfg.getd("slope_map.p_in_min_w"),
                                                            cfg.getd("slope_map.p_in_max_w"));
  const Eigen::VectorXd w_axis = Eigen::VectorXd::LinSpaced(nw, cfg.getd("slope_map.omega_min_mhz"),
                                                            cfg.getd("slope_map.omega_max_mhz"));

  CsvFile csv(cfg.echo());
  csv.header("p_in_w,omega_mhz,slope_v_per_hz");
  for (Eigen::Index i = 0; i < p_axis.size(); ++i)
    for (Eigen::Index j = 0; j < w_axis.size(); ++j)
      csv.row({p_axis(i), w_axis(j), slope_at_resonance(cav, rates, w_axis(j), p_axis(i), lock)});
  csv.write(out);
  return 0;
}

int cmd_sense_map(const RunConfig& cfg, const std::string& out) {
  const SenseSetup s = sense_setup(cfg);
  const auto pts = run_sweep(s, s.ppb.values, s.p_in.values, s.omega.values, cfg);

  CsvFile csv(cfg.echo());
  for (const auto& p : pts)
    if (!p.error.empty())
      csv.comment("point_error: nv_ppb=" + fmt17(p.nv_ppb) + " p_in_w=" + fmt17(p.p_in) +
                  " omega_mhz=" + fmt17(p.omega) + " " + p.error);
  csv.header(sweep_columns);
  append_point_rows(csv, pts);
  csv.write(out);
  return 0;
}

// Reflected on-resonance power at a solved operating point (reported by the
// optimizer regardless of the sensing channel).
double reflected_at_resonance(const SensitivityPoint<double>& pt, double r2, const RunConfig& cfg) {
  DiamondSample<double> sample = cfg.sample();
  sample.nv_ppb = pt.nv_ppb;
  sample.alpha0_abs = ppb_to_density(pt.nv_ppb, sample.n_carbon) * sample.sigma_nv * sample.path_length_l;
  const MirrorPair<double> mirrors{pt.r1_matched, r2};
  const CavityConfig<double> cav{mirrors, sample};
  const double gp = pump_rate_frozen(cav, pt.p_in);
  const auto state = steady_state(cfg.rates(), DrivePoint<double>{pt.omega, gp, 0.0});
  return reflected_power(pt.p_in, mirrors, propagation_loss(sample, state.rho_g));
}

int cmd_optimize(const RunConfig& cfg, const std::string& out) {
  const SenseSetup s = sense_setup(cfg);

  std::string last_error;
  auto batch = [&](const Eigen::VectorXd& ppb, const Eigen::VectorXd& p_in,
                   const Eigen::VectorXd& omega) -> Eigen::VectorXd {
    const auto pts = run_sweep(s, ppb, p_in, omega, cfg);
    Eigen::VectorXd eta(static_cast<Eigen::Index>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i) {
      eta(static_cast<Eigen::Index>(i)) = pts[i].eta;
      if (!pts[i].error.empty()) last_error = pts[i].error;
    }
    return eta;
  };

  const GridOptimum opt = grid_refine(s.ppb, s.p_in, s.omega, batch, cfg.geti("optimize.rounds"),
                                      cfg.geti("optimize.refine"));
  if (!opt.found)
    throw config_error("optimize: no feasible point in the sweep grid" +
                       (last_error.empty() ? std::string() : " (last error: " + last_error + ")"));

  // Re-evaluate the winning cell for the full operating-point record.
  const ShotNoiseConstants<double> pc{cfg.getd("constants.gamma_e_hz_per_t"),
                                      cfg.getd("constants.wavelength_nm")};
  const SensitivityPoint<double> best =
      sensitivity(opt.a, opt.b, opt.c, cfg.rates(), s.r2, s.channel, cfg.sample(), pc);
  const double p_r0 = reflected_at_resonance(best, s.r2, cfg);

  CsvFile csv(cfg.echo());
  csv.comment("evaluations=" + std::to_string(opt.evaluations));
  csv.header(std::string(sweep_columns) + ",p_r0_w");
  csv.row({best.nv_ppb, best.p_in, best.omega, best.eta, best.finesse, best.p_cav, best.p_detected,
           best.r1_matched, p_r0});
  csv.write(out);

  std::cout << "optimum (" << to_string(s.channel) << " channel, " << opt.evaluations
            << " evaluations)\n"
            << "  eta      = " << fmt17(best.eta) << " T/sqrt(Hz)\n"
            << "  omega    = " << fmt17(best.omega) << " MHz\n"
            << "  nv       = " << fmt17(best.nv_ppb) << " ppb\n"
            << "  p_in     = " << fmt17(best.p_in) << " W\n"
            << "  finesse  = " << fmt17(best.finesse) << "\n"
            << "  p_cav    = " << fmt17(best.p_cav) << " W\n"
            << "  p_r(0)   = " << fmt17(p_r0) << " W\n"
            << "  r1       = " << fmt17(best.r1_matched) << "\n";
  return 0;
}

int cmd_psd(const RunConfig& cfg, const std::string& trace_path, const std::string& out) {
  const TimeTrace trace = read_trace(trace_path);
  const Spectrum spec = asd(trace, cfg.getd("noise.resolution_hz"));

  CsvFile csv(cfg.echo());
  csv.comment("trace=" + trace_path + " unit=" + to_string(trace.unit) +
              " samples=" + std::to_string(trace.values.size()) +
              " sample_rate_hz=" + fmt17(trace.sample_rate));
  csv.header("freq_hz,asd");
  for (Eigen::Index i = 0; i < spec.freqs.size(); ++i) csv.row({spec.freqs(i), spec.asd(i)});
  csv.write(out);
  return 0;
}

int cmd_allan(const RunConfig& cfg, const std::string& trace_path, const std::string& out) {
  const TimeTrace trace = read_trace(trace_path);
  const double fs = trace.sample_rate;
  const long n = trace.values.size();
  if (n < 2) throw trace_too_short("allan: trace has fewer than 2 samples");

  long m_min = 1;
  long m_max = n / 2;
  if (!std::isnan(cfg.getd("allan.tau_min_s"))) m_min = std::lround(cfg.getd("allan.tau_min_s") * fs);
  if (!std::isnan(cfg.getd("allan.tau_max_s"))) m_max = std::lround(cfg.getd("allan.tau_max_s") * fs);
  if (m_min < 1 || m_max < m_min || 2 * m_max > n)
    throw config_error("allan tau range must satisfy 1/fs <= tau_min <= tau_max <= N/(2 fs)");
  const long points = cfg.geti("allan.points");
  if (points < 1) throw config_error("allan.points must be >= 1");

  std::set<long> ms;
  for (long k = 0; k < points; ++k) {
    const double f = points == 1 ? 0.0 : double(k) / double(points - 1);
    const double lm = std::log(double(m_min)) + f * (std::log(double(m_max)) - std::log(double(m_min)));
    ms.insert(std::min(m_max, std::max(m_min, std::lround(std::exp(lm)))));
  }
  std::vector<double> taus;
  for (long m : ms) taus.push_back(double(m) / fs);

  const AllanResult ar = allan_overlapping(trace, taus);

  CsvFile csv(cfg.echo());
  csv.comment("trace=" + trace_path + " unit=" + to_string(trace.unit) +
              " samples=" + std::to_string(n) + " sample_rate_hz=" + fmt17(fs));
  csv.header("tau_s,adev,pairs");
  for (Eigen::Index i = 0; i < ar.taus.size(); ++i)
    csv.row({ar.taus(i), ar.deviations(i), double(ar.counts(i))});
  csv.write(out);
  return 0;
}

int cmd_synth(const RunConfig& cfg, const std::string& out) {
  SynthParams params;
  params.asd = cfg.getd("synth.asd");
  params.drift_per_s = cfg.getd("synth.drift_per_s");
  params.amplitude = cfg.getd("synth.amplitude");
  params.freq_hz = cfg.getd("synth.freq_hz");

  TimeTrace trace = synth_trace(synth_kind_from_string(cfg.gets("synth.kind")), params,
                                static_cast<std::uint64_t>(cfg.geti("run.seed")),
                                cfg.getd("synth.sample_rate_hz"), cfg.geti("synth.length"));
  trace.unit = trace_unit_from_string(cfg.gets("synth.unit"));
  write_trace(trace, out, cfg.echo());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cavity-enhanced pump-absorption magnetometry: spectra, sensitivity maps, noise analysis"};
  app.set_version_flag("--version", admr::artifact_version);
  app.require_subcommand(1);

  std::string config_path, out_path, trace_path, seed_str, threads_str;
  std::vector<std::string> sets;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (default: $ADMR_SIM_CONFIG)");
    sub->add_option("--set", sets, "override a config key, key=value (repeatable)");
    sub->add_option("--seed", seed_str, "override run.seed");
    sub->add_option("--threads", threads_str, "override run.threads (0 = all cores)");
    sub->add_option("--out", out_path, "output CSV path")->required();
    return sub;
  };

  CLI::App* spectrum = add_common(app.add_subcommand("spectrum", "lock-in spectrum over a detuning grid"));
  CLI::App* slope_map = add_common(app.add_subcommand("slope-map", "resonance slope over a P_in x Omega grid"));
  CLI::App* sense_map = add_common(app.add_subcommand("sense-map", "shot-noise sensitivity sweep"));
  CLI::App* optimize = add_common(app.add_subcommand("optimize", "refine the sensitivity-sweep optimum"));
  CLI::App* psd = add_common(app.add_subcommand("psd", "amplitude spectral density of a trace"));
  CLI::App* allan = add_common(app.add_subcommand("allan", "overlapping Allan deviation of a trace"));
  CLI::App* synth = add_common(app.add_subcommand("synth", "generate a synthetic trace"));
  psd->add_option("trace", trace_path, "input trace CSV")->required();
  allan->add_option("trace", trace_path, "input trace CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    admr::RunConfig cfg;
    if (config_path.empty())
      if (const char* env = std::getenv("ADMR_SIM_CONFIG"); env && *env) config_path = env;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const auto& assignment : sets) cfg.set(assignment);
    if (!seed_str.empty()) cfg.set("run.seed=" + seed_str);
    if (!threads_str.empty()) cfg.set("run.threads=" + threads_str);

    if (spectrum->parsed()) return cmd_spectrum(cfg, out_path);
    if (slope_map->parsed()) return cmd_slope_map(cfg, out_path);
    if (sense_map->parsed()) return cmd_sense_map(cfg, out_path);
    if (optimize->parsed()) return cmd_optimize(cfg, out_path);
    if (psd->parsed()) return cmd_psd(cfg, trace_path, out_path);
    if (allan->parsed()) return cmd_allan(cfg, trace_path, out_path);
    if (synth->parsed()) return cmd_synth(cfg, out_path);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const admr::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const admr::model_error& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
