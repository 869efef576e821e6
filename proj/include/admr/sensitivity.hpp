#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "admr/bloch.hpp"
#include "admr/cavity.hpp"
#include "admr/constants.hpp"
#include "admr/errors.hpp"
#include "admr/spectrum.hpp"

namespace admr {

template <typename Scalar = double>
struct SweepGrid {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nv_ppb_values;  // log-spaced in the shipped configs
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p_in_values;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> omega_values;
  std::string fixed;  // label of the axis held constant ("p_in"|"omega"|"nv_ppb"|"")
};

template <typename Scalar = double>
struct SensitivityPoint {
  Scalar nv_ppb = 0, p_in = 0, omega = 0;  // grid coordinates
  Scalar eta = std::numeric_limits<Scalar>::quiet_NaN();  // T/sqrt(Hz)
  Scalar slope_w_per_hz = 0;   // max |dP/df| over the detuning scan
  Scalar p_detected = 0;       // off-resonant detected power, W
  Scalar finesse = 0;          // loaded finesse at the MW-off point
  Scalar p_cav = 0;            // intra-cavity power at the pump-freeze point
  Scalar r1_matched = 0;       // solved input-mirror reflectivity
  std::string error;           // non-empty when this point failed
};

// Physical constants that enter the projection; both are plain config values.
template <typename Scalar = double>
struct ShotNoiseConstants {
  Scalar gamma_e_hz_t = constants::default_gamma_e_hz_t;
  Scalar wavelength_nm = constants::default_wavelength_nm;
};

template <typename Scalar>
Scalar shot_noise_asd(Scalar p_detected, Scalar wavelength_nm = Scalar(constants::default_wavelength_nm)) {
  using std::sqrt;
  if (p_detected < Scalar(0)) throw bad_params("detected power must be >= 0");
  const Scalar nu = Scalar(constants::c_light_m_s) / (wavelength_nm * Scalar(1e-9));
  return sqrt(Scalar(2) * Scalar(constants::planck_h_js) * nu * p_detected);
}

// Solve the impedance-matching fixed point R1 = R2 exp(-alpha(MW off)).
// alpha depends on the MW-off ground population, which depends on the pump
// rate, which depends on P_cav and hence on R1 — damped fixed-point
// iteration, tolerance 1e-10 on the R1 update.
template <typename Scalar>
Scalar impedance_match_r1(Scalar r2, const DiamondSample<Scalar>& sample, const RateSet<Scalar>& rates,
                          Scalar p_in) {
  using std::exp;
  if (!(r2 > Scalar(0)) || r2 > Scalar(1)) throw bad_params("r2 must be in (0, 1]");
  Scalar r1 = Scalar(0.9);
  for (int it = 0; it < 10000; ++it) {
    const CavityConfig<Scalar> trial{MirrorPair<Scalar>{r1, r2}, sample};
    const Scalar gp = pump_rate_frozen(trial, p_in);
    const SteadyState<Scalar> off = steady_state(rates, DrivePoint<Scalar>{Scalar(0), gp, Scalar(0)});
    const Scalar target = r2 * exp(-propagation_loss(sample, off.rho_g));
    const Scalar next = (r1 + target) / Scalar(2);
    if (std::abs(double(next - r1)) < 1e-10) return next;
    r1 = next;
  }
  throw no_convergence("impedance matching did not converge in 10000 iterations");
}

// Shot-noise-limited sensitivity of the single-tone, single-resonance
// response at one grid point. The diamond is taken loss-balanced: the non-NV
// absorption is set equal to the concentration's own fully-polarized NV
// absorption. The detuning scan covers +/- 3 Gamma2 in 121 points; the slope
// is the steepest central-difference derivative of the raw channel power.
template <typename Scalar>
SensitivityPoint<Scalar> sensitivity(Scalar nv_ppb, Scalar p_in, Scalar omega,
                                     const RateSet<Scalar>& rates, Scalar r2, Channel channel,
                                     const DiamondSample<Scalar>& sample_template,
                                     const ShotNoiseConstants<Scalar>& pc = {}) {
  SensitivityPoint<Scalar> pt;
  pt.nv_ppb = nv_ppb;
  pt.p_in = p_in;
  pt.omega = omega;

  DiamondSample<Scalar> sample = sample_template;
  sample.nv_ppb = nv_ppb;
  sample.alpha0_abs = ppb_to_density(nv_ppb, sample.n_carbon) * sample.sigma_nv * sample.path_length_l;

  pt.r1_matched = impedance_match_r1(r2, sample, rates, p_in);
  const CavityConfig<Scalar> cav{MirrorPair<Scalar>{pt.r1_matched, r2}, sample};

  const Scalar gp = pump_rate_frozen(cav, p_in);
  const Scalar g2 = gamma2_total(rates, gp);
  pt.p_cav = intracavity_power(p_in, cav.mirrors, propagation_loss(sample, Scalar(1)));

  const SteadyState<Scalar> off_state = steady_state(rates, DrivePoint<Scalar>{Scalar(0), gp, Scalar(0)});
  pt.finesse = finesse(cav.mirrors, propagation_loss(sample, off_state.rho_g));

  const int n = 121;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> deltas =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::LinSpaced(n, -Scalar(3) * g2, Scalar(3) * g2);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> power(n);
  for (int i = 0; i < n; ++i)
    power(i) = detail::channel_power(deltas(i), cav, rates, omega, gp, p_in, channel);
  const Scalar p_off = detail::channel_power(detail::off_resonance_delta<Scalar>(), cav, rates,
                                             omega, gp, p_in, channel);

  const Scalar h = deltas(1) - deltas(0);
  Scalar max_slope = 0;
  for (int i = 0; i < n; ++i) {
    Scalar d;
    if (i == 0)
      d = (power(1) - power(0)) / h;
    else if (i == n - 1)
      d = (power(n - 1) - power(n - 2)) / h;
    else
      d = (power(i + 1) - power(i - 1)) / (Scalar(2) * h);
    if (d < Scalar(0)) d = -d;
    if (d > max_slope) max_slope = d;
  }
  pt.slope_w_per_hz = max_slope / Scalar(1e6);  // detunings are MHz

  // Transmission detects the off-resonant throughput. In reflection the
  // matched off-resonant power is (numerically) zero and the on-resonance
  // reflected power bounds the photon flux on the detector.
  if (channel == Channel::transmit)
    pt.p_detected = p_off;
  else
    pt.p_detected = std::max(p_off, power((n - 1) / 2));

  if (omega == Scalar(0) || pt.slope_w_per_hz == Scalar(0))
    throw zero_slope("sensitivity undefined at omega = " + std::to_string(double(omega)));

  pt.eta = shot_noise_asd(pt.p_detected, pc.wavelength_nm) / pt.slope_w_per_hz / pc.gamma_e_hz_t;
  return pt;
}

// Full grid sweep, row-major over (nv_ppb, p_in, omega). Per-point model
// errors are recorded in the point and never abort the sweep. The work is
// split over threads in contiguous chunks; assembly order is index order, so
// output does not depend on the thread count.
template <typename Scalar>
std::vector<SensitivityPoint<Scalar>> sweep(const SweepGrid<Scalar>& grid, const RateSet<Scalar>& rates,
                                            Scalar r2, Channel channel,
                                            const DiamondSample<Scalar>& sample_template,
                                            const ShotNoiseConstants<Scalar>& pc = {},
                                            unsigned n_threads = 0) {
  const Eigen::Index na = grid.nv_ppb_values.size();
  const Eigen::Index nb = grid.p_in_values.size();
  const Eigen::Index nc = grid.omega_values.size();
  if (na == 0 || nb == 0 || nc == 0) throw empty_grid("sweep: an axis has no values");
  const Eigen::Index total = na * nb * nc;

  std::vector<SensitivityPoint<Scalar>> out(static_cast<size_t>(total));
  auto run_range = [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index idx = lo; idx < hi; ++idx) {
      const Eigen::Index ia = idx / (nb * nc);
      const Eigen::Index ib = (idx / nc) % nb;
      const Eigen::Index ic = idx % nc;
      const Scalar ppb = grid.nv_ppb_values(ia);
      const Scalar pin = grid.p_in_values(ib);
      const Scalar om = grid.omega_values(ic);
      try {
        out[static_cast<size_t>(idx)] = sensitivity(ppb, pin, om, rates, r2, channel, sample_template, pc);
      } catch (const model_error& e) {
        SensitivityPoint<Scalar>& pt = out[static_cast<size_t>(idx)];
        pt.nv_ppb = ppb;
        pt.p_in = pin;
        pt.omega = om;
        pt.error = e.what();
      }
    }
  };

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<Eigen::Index>(n_threads, total));
  if (n_threads <= 1) {
    run_range(0, total);
  } else {
    std::vector<std::thread> pool;
    const Eigen::Index chunk = (total + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
      const Eigen::Index lo = Eigen::Index(t) * chunk;
      const Eigen::Index hi = std::min<Eigen::Index>(lo + chunk, total);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace admr
