#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "admr/errors.hpp"

namespace admr {

// Five-level system: |1>,|2> ground spin doublet, |3>,|4> optically excited,
// |5> metastable shelf. One coherence between |1> and |2> driven at Rabi
// frequency omega with detuning delta. All rates in MHz except gamma1 (kHz).
template <typename Scalar = double>
struct RateSet {
  Scalar k31 = 65.9;          // |3> -> |1>
  Scalar k42 = 65.9;          // |4> -> |2>
  Scalar k35 = 10.0;          // |3> -> |5> intersystem crossing
  Scalar k45 = 53.3;          // |4> -> |5> intersystem crossing (k45 > k35)
  Scalar k51 = 4.4;           // |5> -> |1>
  Scalar k52 = 2.2;           // |5> -> |2>
  Scalar gamma1 = 0.182;      // ground-doublet relaxation, kHz
  Scalar gamma2_star = 1.0 / 3.0;  // pure dephasing, MHz

  Scalar gamma1_mhz() const { return gamma1 * Scalar(1e-3); }
};

template <typename Scalar = double>
struct DrivePoint {
  Scalar omega = 0;    // MW Rabi frequency, MHz
  Scalar gamma_p = 0;  // optical excitation rate, MHz
  Scalar delta = 0;    // MW detuning, MHz
};

template <typename Scalar = double>
struct SteadyState {
  Scalar rho11 = 0, rho22 = 0, rho33 = 0, rho44 = 0, rho55 = 0;
  Scalar rho_g = 0;         // rho11 + rho22
  bool degenerate = false;  // all-zero input resolved by convention
};

// Total transverse decay of the |1>-|2> coherence. Each ground level is
// depleted by the pump at gamma_p and exchanged at gamma1, so the Lindblad
// dephasing contribution is the full gamma_p + gamma1 (not half), on top of
// the pure dephasing gamma2_star.
template <typename Scalar>
Scalar gamma2_total(const RateSet<Scalar>& r, Scalar gamma_p) {
  return r.gamma2_star + r.gamma1_mhz() + gamma_p;
}

template <typename Scalar>
bool rates_admissible(const RateSet<Scalar>& r) {
  const Scalar rates[] = {r.k31, r.k42, r.k35, r.k45, r.k51, r.k52, r.gamma1, r.gamma2_star};
  for (Scalar v : rates)
    if (!(v >= Scalar(0)) || !std::isfinite(double(v))) return false;
  if (!(r.k45 > r.k35)) return false;
  // shelf lifetime is longer than 150 ns
  if (r.k51 + r.k52 > Scalar(1.0 / 0.150) + Scalar(1e-12)) return false;
  return true;
}

namespace detail {

// State layout: [rho11, rho22, rho33, rho44, rho55, u, v] with the coherence
// rho12 = u + i v in the rotating frame. Time derivative of the full system:
//   d rho11 = -Gp rho11 + k31 rho33 + k51 rho55 + g1 (rho22 - rho11) - omega v
//   d rho22 = -Gp rho22 + k42 rho44 + k52 rho55 + g1 (rho11 - rho22) + omega v
//   d rho33 =  Gp rho11 - (k31 + k35) rho33
//   d rho44 =  Gp rho22 - (k42 + k45) rho44
//   d rho55 =  k35 rho33 + k45 rho44 - (k51 + k52) rho55
//   d u     = -Gamma2 u - delta v
//   d v     =  delta u - Gamma2 v + (omega/2)(rho11 - rho22)
// The population-coupling sign (-omega v into rho11) is the Hamiltonian-
// consistent partner of d rho12 = (i delta - Gamma2) rho12 + i(omega/2)
// (rho11 - rho22); adiabatic elimination of the coherence then yields the
// equalizing effective rate W = omega^2 Gamma2 / (2 (Gamma2^2 + delta^2)).
template <typename Scalar>
Eigen::Matrix<Scalar, 7, 7> generator(const RateSet<Scalar>& r, const DrivePoint<Scalar>& d) {
  const Scalar g1 = r.gamma1_mhz();
  const Scalar G2 = gamma2_total(r, d.gamma_p);
  Eigen::Matrix<Scalar, 7, 7> A = Eigen::Matrix<Scalar, 7, 7>::Zero();
  // d rho11
  A(0, 0) = -d.gamma_p - g1;
  A(0, 1) = g1;
  A(0, 2) = r.k31;
  A(0, 4) = r.k51;
  A(0, 6) = -d.omega;
  // d rho22
  A(1, 0) = g1;
  A(1, 1) = -d.gamma_p - g1;
  A(1, 3) = r.k42;
  A(1, 4) = r.k52;
  A(1, 6) = d.omega;
  // d rho33
  A(2, 0) = d.gamma_p;
  A(2, 2) = -(r.k31 + r.k35);
  // d rho44
  A(3, 1) = d.gamma_p;
  A(3, 3) = -(r.k42 + r.k45);
  // d rho55
  A(4, 2) = r.k35;
  A(4, 3) = r.k45;
  A(4, 4) = -(r.k51 + r.k52);
  // d u
  A(5, 5) = -G2;
  A(5, 6) = -d.delta;
  // d v
  A(6, 0) = d.omega / Scalar(2);
  A(6, 1) = -d.omega / Scalar(2);
  A(6, 5) = d.delta;
  A(6, 6) = -G2;
  return A;
}

template <typename Scalar>
SteadyState<Scalar> pack_state(const Eigen::Matrix<Scalar, 7, 1>& x, bool degenerate = false) {
  SteadyState<Scalar> s;
  s.rho11 = x(0);
  s.rho22 = x(1);
  s.rho33 = x(2);
  s.rho44 = x(3);
  s.rho55 = x(4);
  s.rho_g = s.rho11 + s.rho22;
  s.degenerate = degenerate;
  return s;
}

}  // namespace detail

// Steady state by replacing the rho11 row with the trace constraint and
// solving the linear system.
template <typename Scalar>
SteadyState<Scalar> steady_state(const RateSet<Scalar>& r, const DrivePoint<Scalar>& d) {
  const bool all_zero = r.k31 == 0 && r.k42 == 0 && r.k35 == 0 && r.k45 == 0 && r.k51 == 0 &&
                        r.k52 == 0 && r.gamma1 == 0 && d.omega == 0 && d.gamma_p == 0;
  if (all_zero) {
    Eigen::Matrix<Scalar, 7, 1> x = Eigen::Matrix<Scalar, 7, 1>::Zero();
    x(0) = x(1) = Scalar(0.5);
    return detail::pack_state(x, /*degenerate=*/true);
  }

  Eigen::Matrix<Scalar, 7, 7> A = detail::generator(r, d);
  A.row(0) << 1, 1, 1, 1, 1, 0, 0;  // trace constraint replaces the rho11 equation
  Eigen::Matrix<Scalar, 7, 1> b = Eigen::Matrix<Scalar, 7, 1>::Zero();
  b(0) = 1;

  Eigen::FullPivLU<Eigen::Matrix<Scalar, 7, 7>> lu(A);
  if (!lu.isInvertible())
    throw singular_system("steady-state system is rank-deficient beyond the trace constraint");
  return detail::pack_state(Eigen::Matrix<Scalar, 7, 1>(lu.solve(b)));
}

// Independent verification oracle: explicit RK4 integration of the same ODE
// system from rho11 = rho22 = 1/2. Converged when the populations at t_end
// and t_end/2 agree to 1e-6.
template <typename Scalar>
SteadyState<Scalar> steady_state_ode_oracle(const RateSet<Scalar>& r, const DrivePoint<Scalar>& d,
                                            Scalar t_end, Scalar dt) {
  if (!(t_end > 0) || !(dt > 0)) throw bad_params("ode oracle needs t_end > 0 and dt > 0");
  const Eigen::Matrix<Scalar, 7, 7> A = detail::generator(r, d);

  Eigen::Matrix<Scalar, 7, 1> x = Eigen::Matrix<Scalar, 7, 1>::Zero();
  x(0) = x(1) = Scalar(0.5);

  long n_steps = static_cast<long>(std::ceil(double(t_end / dt)));
  if (n_steps % 2) ++n_steps;  // land exactly on t_end/2
  const Scalar h = t_end / Scalar(n_steps);

  Eigen::Matrix<Scalar, 7, 1> x_half = x;
  for (long i = 0; i < n_steps; ++i) {
    const Eigen::Matrix<Scalar, 7, 1> k1 = A * x;
    const Eigen::Matrix<Scalar, 7, 1> k2 = A * (x + (h / Scalar(2)) * k1).eval();
    const Eigen::Matrix<Scalar, 7, 1> k3 = A * (x + (h / Scalar(2)) * k2).eval();
    const Eigen::Matrix<Scalar, 7, 1> k4 = A * (x + h * k3).eval();
    x += (h / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    if (i + 1 == n_steps / 2) x_half = x;
  }

  const Scalar max_dev = (x.template head<5>() - x_half.template head<5>()).cwiseAbs().maxCoeff();
  if (max_dev > Scalar(1e-6))
    throw non_convergence("ode oracle populations at t_end vs t_end/2 differ by " +
                          std::to_string(double(max_dev)));
  return detail::pack_state(x);
}

}  // namespace admr
