#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "admr/bloch.hpp"
#include "admr/cavity.hpp"
#include "admr/errors.hpp"

namespace admr {

enum class Channel { transmit, reflect };

inline const char* to_string(Channel c) { return c == Channel::transmit ? "transmit" : "reflect"; }

inline Channel channel_from_string(const std::string& s) {
  if (s == "transmit") return Channel::transmit;
  if (s == "reflect") return Channel::reflect;
  throw config_error("unknown channel '" + s + "' (transmit|reflect)");
}

template <typename Scalar = double>
struct LockinConfig {
  Scalar delta_mod = std::numeric_limits<Scalar>::quiet_NaN();  // MHz; NaN -> Gamma2/2 at the operating point
  Scalar a_par = constants::default_a_par_mhz;                  // hyperfine constant, MHz
  std::vector<int> ml_set = {-1, 0, 1};                         // nuclear projections
  std::vector<int> mx_set = {-1, 0, 1};                         // drive tones ({0} = single tone)
  Scalar gain_v0 = 65e6;                                        // G*V0, volts
  Channel channel = Channel::transmit;
};

template <typename Scalar = double>
struct SpectrumResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> detunings;  // MHz
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> signal;     // V
  Scalar delta_mod_used = 0;                           // MHz
  Scalar gamma_p = 0;                                  // MHz
  Scalar gamma2 = 0;                                   // MHz
};

namespace detail {

// Reference detuning treated as "off resonance" for normalization; far enough
// that the drive decouples to double precision.
template <typename Scalar>
constexpr Scalar off_resonance_delta() {
  return Scalar(1e6);
}

// Cavity output power for one fully assembled operating point.
template <typename Scalar>
Scalar channel_power(Scalar delta, const CavityConfig<Scalar>& cav, const RateSet<Scalar>& rates,
                     Scalar omega, Scalar gamma_p, Scalar p_in, Channel ch) {
  const SteadyState<Scalar> s = steady_state(rates, DrivePoint<Scalar>{omega, gamma_p, delta});
  const Scalar alpha = propagation_loss(cav.sample, s.rho_g);
  return ch == Channel::transmit ? transmitted_power(p_in, cav.mirrors, alpha)
                                 : reflected_power(p_in, cav.mirrors, alpha);
}

}  // namespace detail

// Single-resonance cavity output at MW detuning delta, with the pump rate
// frozen at the MW-off point.
template <typename Scalar>
Scalar resonance_power(Scalar delta, const CavityConfig<Scalar>& cav, const RateSet<Scalar>& rates,
                       Scalar omega, Scalar p_in, Channel ch) {
  const Scalar gp = pump_rate_frozen(cav, p_in);
  return detail::channel_power(delta, cav, rates, omega, gp, p_in, ch);
}

// Resolve the modulation depth: explicit value, or Gamma2/2 at the operating
// point when unset.
template <typename Scalar>
Scalar resolve_delta_mod(const LockinConfig<Scalar>& cfg, const CavityConfig<Scalar>& cav,
                         const RateSet<Scalar>& rates, Scalar p_in) {
  if (!std::isnan(double(cfg.delta_mod))) return cfg.delta_mod;
  const Scalar gp = pump_rate_frozen(cav, p_in);
  return gamma2_total(rates, gp) / Scalar(2);
}

// Frequency-modulated lock-in signal: normalized response differences at
// +/- delta_mod, summed over nuclear projections and drive tones, each tone
// shifted by (ml + mx) * a_par:
//   S(D) = (G V0 / 2) * sum_mx sum_ml [Pn(D + dm + (ml+mx) A) - Pn(D - dm + (ml+mx) A)]
// where Pn is the channel power normalized to its off-resonant value.
template <typename Scalar>
SpectrumResult<Scalar> lockin_spectrum(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& detunings,
                                       const CavityConfig<Scalar>& cav, const RateSet<Scalar>& rates,
                                       Scalar omega, Scalar p_in, const LockinConfig<Scalar>& cfg) {
  if (detunings.size() == 0) throw empty_grid("lockin_spectrum: empty detuning grid");
  if (cfg.delta_mod < Scalar(0)) throw bad_params("delta_mod must be >= 0");
  if (!(cfg.a_par > Scalar(0))) throw bad_params("a_par must be > 0");

  SpectrumResult<Scalar> out;
  out.detunings = detunings;
  out.signal.resize(detunings.size());
  out.gamma_p = pump_rate_frozen(cav, p_in);
  out.gamma2 = gamma2_total(rates, out.gamma_p);
  out.delta_mod_used = std::isnan(double(cfg.delta_mod)) ? out.gamma2 / Scalar(2) : cfg.delta_mod;

  const Scalar p_off = detail::channel_power(detail::off_resonance_delta<Scalar>(), cav, rates,
                                             omega, out.gamma_p, p_in, cfg.channel);
  if (p_off == Scalar(0)) throw bad_params("off-resonant power is zero; cannot normalize");

  for (Eigen::Index i = 0; i < detunings.size(); ++i) {
    const Scalar D = detunings(i);
    Scalar acc = 0;
    for (int mx : cfg.mx_set) {
      for (int ml : cfg.ml_set) {
        const Scalar shift = Scalar(ml + mx) * cfg.a_par;
        const Scalar p_plus = detail::channel_power(D + out.delta_mod_used + shift, cav, rates,
                                                    omega, out.gamma_p, p_in, cfg.channel);
        const Scalar p_minus = detail::channel_power(D - out.delta_mod_used + shift, cav, rates,
                                                     omega, out.gamma_p, p_in, cfg.channel);
        acc += p_plus / p_off - p_minus / p_off;
      }
    }
    out.signal(i) = cfg.gain_v0 / Scalar(2) * acc;
  }
  return out;
}

// dS/df at resonance in V/Hz: central difference with step min(delta_mod,
// Gamma2)/50 (detunings are in MHz, hence the 1e6).
template <typename Scalar>
Scalar slope_at_resonance(const CavityConfig<Scalar>& cav, const RateSet<Scalar>& rates,
                          Scalar omega, Scalar p_in, const LockinConfig<Scalar>& cfg) {
  LockinConfig<Scalar> c = cfg;
  c.delta_mod = resolve_delta_mod(cfg, cav, rates, p_in);
  const Scalar gp = pump_rate_frozen(cav, p_in);
  const Scalar g2 = gamma2_total(rates, gp);
  const Scalar h = std::min(c.delta_mod, g2) / Scalar(50);
  if (!(h > Scalar(0))) throw step_underflow("slope step is zero (delta_mod or Gamma2 is zero)");

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> pts(2);
  pts << -h, h;
  const SpectrumResult<Scalar> s = lockin_spectrum(pts, cav, rates, omega, p_in, c);
  return (s.signal(1) - s.signal(0)) / (Scalar(2) * h) / Scalar(1e6);
}

template <typename Scalar = double>
struct ResonancePair {
  Scalar f_minus = 0, f_plus = 0;  // Hz
};

template <typename Scalar>
ResonancePair<Scalar> zeeman_resonances(Scalar b_nv_tesla, Scalar gamma_e_hz_t,
                                        Scalar d_zfs_hz = Scalar(constants::default_d_zfs_hz)) {
  if (!(gamma_e_hz_t > Scalar(0))) throw bad_params("gamma_e must be > 0");
  return {d_zfs_hz - gamma_e_hz_t * b_nv_tesla, d_zfs_hz + gamma_e_hz_t * b_nv_tesla};
}

}  // namespace admr
