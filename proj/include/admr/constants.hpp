#pragma once

namespace admr::constants {

// Unit conventions used throughout:
//   frequencies/rates in plain MHz (= 1/us, no 2*pi), time in us,
//   lengths in mm, powers in W, cross sections in mm^2, densities in mm^-3.

inline constexpr double planck_h_js = 6.62607015e-34;      // J*s (exact, SI)
inline constexpr double c_light_m_s = 299792458.0;         // m/s (exact, SI)
inline constexpr double n_carbon_mm3 = 1.76e20;            // carbon number density of diamond
inline constexpr double default_sigma_nv_mm2 = 3.1e-15;    // single-NV absorption cross section
inline constexpr double default_path_length_mm = 2.6;      // round trip through the sample (2 x 1.3)
inline constexpr double default_epsilon_khz_w = 75.0;      // pump-rate coefficient eps = Gamma_p / P_cav
inline constexpr double default_alpha_r = 0.006;           // residual round-trip loss
inline constexpr double default_a_par_mhz = 2.16;          // 14N hyperfine splitting
inline constexpr double default_gamma_e_hz_t = 28.024e9;   // electron gyromagnetic ratio
inline constexpr double default_wavelength_nm = 532.0;     // pump wavelength
inline constexpr double default_d_zfs_hz = 2.87e9;         // zero-field splitting

inline constexpr double photon_energy_j(double wavelength_nm) {
  return planck_h_js * c_light_m_s / (wavelength_nm * 1e-9);
}

}  // namespace admr::constants
