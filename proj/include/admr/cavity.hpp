#pragma once
#include <cmath>
#include <string>

#include "admr/constants.hpp"
#include "admr/errors.hpp"

namespace admr {

template <typename Scalar = double>
struct MirrorPair {
  Scalar r1 = 0.948;  // input-mirror power reflectivity, T1 = 1 - R1
  Scalar r2 = 0.998;  // back-mirror power reflectivity
};

template <typename Scalar = double>
struct DiamondSample {
  Scalar nv_ppb = 0.16;                                      // NV- concentration
  Scalar sigma_nv = constants::default_sigma_nv_mm2;         // mm^2
  Scalar path_length_l = constants::default_path_length_mm;  // mm, round trip
  Scalar alpha0_abs = 0.0781;                                // non-NV absorption per round trip
  Scalar alpha_r = constants::default_alpha_r;               // residual loss per round trip
  Scalar epsilon = constants::default_epsilon_khz_w;         // kHz/W, Gamma_p = eps * P_cav
  Scalar n_carbon = constants::n_carbon_mm3;                 // mm^-3, anchors the ppb conversion
};

template <typename Scalar = double>
struct CavityConfig {
  MirrorPair<Scalar> mirrors;
  DiamondSample<Scalar> sample;
};

template <typename Scalar>
Scalar ppb_to_density(Scalar ppb, Scalar n_carbon = Scalar(constants::n_carbon_mm3)) {
  if (ppb < Scalar(0)) throw negative_concentration(std::to_string(double(ppb)) + " ppb");
  return ppb * Scalar(1e-9) * n_carbon;
}

// Saturable round-trip loss: fixed non-NV absorption + residual loss + the
// NV term proportional to the ground-state population actually absorbing.
template <typename Scalar>
Scalar propagation_loss(const DiamondSample<Scalar>& s, Scalar rho_g) {
  const Scalar nv_density = ppb_to_density(s.nv_ppb, s.n_carbon);
  return s.alpha0_abs + nv_density * s.sigma_nv * s.path_length_l * rho_g + s.alpha_r;
}

template <typename Scalar>
Scalar round_trip_amplitude(const MirrorPair<Scalar>& m, Scalar alpha) {
  using std::exp;
  using std::sqrt;
  const Scalar rho = sqrt(m.r1 * m.r2 * exp(-alpha));
  if (rho >= Scalar(1))
    throw unity_round_trip("round-trip amplitude " + std::to_string(double(rho)) + " >= 1");
  return rho;
}

template <typename Scalar>
Scalar finesse(const MirrorPair<Scalar>& m, Scalar alpha) {
  using std::sqrt;
  const Scalar rho = round_trip_amplitude(m, alpha);
  const Scalar pi = Scalar(3.14159265358979323846);
  return pi * sqrt(rho) / (Scalar(1) - rho);
}

template <typename Scalar>
Scalar intracavity_power(Scalar p_in, const MirrorPair<Scalar>& m, Scalar alpha) {
  const Scalar rho = round_trip_amplitude(m, alpha);
  const Scalar denom = (Scalar(1) - rho) * (Scalar(1) - rho);
  return p_in * (Scalar(1) - m.r1) / denom;
}

template <typename Scalar>
Scalar transmitted_power(Scalar p_in, const MirrorPair<Scalar>& m, Scalar alpha) {
  using std::exp;
  const Scalar rho = round_trip_amplitude(m, alpha);
  const Scalar denom = (Scalar(1) - rho) * (Scalar(1) - rho);
  return p_in * (Scalar(1) - m.r1) * (Scalar(1) - m.r2) * exp(-alpha) / denom;
}

template <typename Scalar>
Scalar reflected_power(Scalar p_in, const MirrorPair<Scalar>& m, Scalar alpha) {
  const Scalar rho = round_trip_amplitude(m, alpha);
  const Scalar denom = m.r1 * (Scalar(1) - rho) * (Scalar(1) - rho);
  const Scalar num = (m.r1 - rho) * (m.r1 - rho);
  return p_in * num / denom;
}

// Gamma_p in MHz from the intra-cavity power; epsilon is stored in kHz/W.
template <typename Scalar>
Scalar pump_rate(Scalar p_cav, const DiamondSample<Scalar>& s) {
  return s.epsilon * Scalar(1e-3) * p_cav;
}

// The pump rate is frozen at the MW-off point: P_cav is evaluated once with
// the ground state fully populated (rho_g = 1) and held fixed across a MW
// sweep.
template <typename Scalar>
Scalar pump_rate_frozen(const CavityConfig<Scalar>& c, Scalar p_in) {
  const Scalar alpha_full = propagation_loss(c.sample, Scalar(1));
  return pump_rate(intracavity_power(p_in, c.mirrors, alpha_full), c.sample);
}

}  // namespace admr
