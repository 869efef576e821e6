#include <Eigen/Dense>
#include <limits>
#include <random>

#include "admr/bloch.hpp"
#include "doctest.h"

using namespace admr;

namespace {

RateSet<double> shipped() { return RateSet<double>{}; }

// Pump rate of the reference operating chain (P_in = 0.4 W through the
// default cavity); regression constant frozen from an independent solver.
constexpr double kOpGammaP = 0.3425879754994686;

void check_close(double got, double want, double rel) {
  // scale(0) makes the tolerance strictly relative; doctest's default scale
  // of 1 would otherwise add an absolute floor of `rel` to every comparison
  CHECK(got == doctest::Approx(want).epsilon(rel).scale(0));
}

}  // namespace

TEST_CASE("all-zero input resolves to the degenerate convention") {
  RateSet<double> r;
  r.k31 = r.k42 = r.k35 = r.k45 = r.k51 = r.k52 = 0;
  r.gamma1 = 0;
  r.gamma2_star = 0.2;  // dephasing alone cannot move populations
  const auto s = steady_state(r, DrivePoint<double>{0, 0, 0});
  CHECK(s.degenerate);
  CHECK(s.rho11 == 0.5);
  CHECK(s.rho22 == 0.5);
  CHECK(s.rho_g == 1.0);

  r.gamma2_star = 0;
  const auto s2 = steady_state(r, DrivePoint<double>{0, 0, 0});
  CHECK(s2.degenerate);
  CHECK(s2.rho11 == 0.5);
}

TEST_CASE("gamma1 alone equalizes the ground doublet") {
  // no pump and no drive: the excited manifold empties through the decay
  // paths and spin-lattice relaxation is the only rate left acting
  RateSet<double> r;
  r.gamma1 = 0.182;  // kHz
  const auto s = steady_state(r, DrivePoint<double>{0, 0, 0});
  CHECK_FALSE(s.degenerate);
  check_close(s.rho11, 0.5, 1e-12);
  check_close(s.rho22, 0.5, 1e-12);
  CHECK(std::abs(s.rho33) < 1e-15);
  CHECK(std::abs(s.rho44) < 1e-15);
  CHECK(std::abs(s.rho55) < 1e-15);
}

TEST_CASE("pump-only steady state: polarization into level 1 (regression)") {
  const auto s = steady_state(shipped(), DrivePoint<double>{0, 0.3, 0});
  CHECK(s.rho22 < s.rho11);  // spin polarization
  check_close(s.rho11, 0.8602867812149063, 1e-9);
  check_close(s.rho22, 0.1282318119578049, 1e-9);
  check_close(s.rho33, 3.40034300875457e-3, 1e-9);
  check_close(s.rho44, 3.227310703636028e-4, 1e-9);
  check_close(s.rho55, 7.758332748170563e-3, 1e-9);
}

TEST_CASE("driven steady state at the reference operating point (regression)") {
  const auto s = steady_state(shipped(), DrivePoint<double>{0.3, kOpGammaP, 0});
  check_close(s.rho11, 0.6629932852880744, 1e-9);
  check_close(s.rho22, 0.3211042603826352, 1e-9);
  check_close(s.rho33, 2.9925365925769e-3, 1e-9);
  check_close(s.rho44, 9.228729738988e-4, 1e-9);
  check_close(s.rho55, 1.19870447628146e-2, 1e-9);
}

TEST_CASE("infinitely detuned drive decouples") {
  const auto r = shipped();
  const double g2 = gamma2_total(r, 0.4);
  const auto off = steady_state(r, DrivePoint<double>{0, 0.4, 0});
  const auto far = steady_state(r, DrivePoint<double>{1.0, 0.4, 1e9 * g2});
  CHECK(std::abs(far.rho11 - off.rho11) < 1e-9);
  CHECK(std::abs(far.rho22 - off.rho22) < 1e-9);
  CHECK(std::abs(far.rho33 - off.rho33) < 1e-9);
  CHECK(std::abs(far.rho44 - off.rho44) < 1e-9);
  CHECK(std::abs(far.rho55 - off.rho55) < 1e-9);
}

TEST_CASE("swapping the 1/2 level roles swaps the populations at delta=0") {
  RateSet<double> r = shipped();
  RateSet<double> swapped = r;
  std::swap(swapped.k31, swapped.k42);
  std::swap(swapped.k35, swapped.k45);
  std::swap(swapped.k51, swapped.k52);

  const DrivePoint<double> d{0.7, 0.4, 0};
  const auto a = steady_state(r, d);
  const auto b = steady_state(swapped, d);
  check_close(a.rho11, b.rho22, 1e-12);
  check_close(a.rho22, b.rho11, 1e-12);
  check_close(a.rho33, b.rho44, 1e-12);
  check_close(a.rho44, b.rho33, 1e-12);
  check_close(a.rho55, b.rho55, 1e-12);
}

TEST_CASE("positivity and normalization over random admissible inputs") {
  std::mt19937_64 rng(7);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
  };
  for (int i = 0; i < 200; ++i) {
    RateSet<double> r;
    r.k31 = uni(30, 100);
    r.k42 = uni(30, 100);
    r.k35 = uni(1, 15);
    r.k45 = uni(r.k35 + 1, 80);
    r.k51 = uni(0.5, 4);
    r.k52 = uni(0.5, std::min(4.0, 6.6 - r.k51));
    r.gamma1 = uni(0, 1);  // kHz
    r.gamma2_star = uni(0.05, 1);
    REQUIRE(rates_admissible(r));

    const DrivePoint<double> d{uni(0, 5), uni(0.01, 1), uni(-3, 3)};
    const auto s = steady_state(r, d);
    const double trace = s.rho11 + s.rho22 + s.rho33 + s.rho44 + s.rho55;
    CHECK(std::abs(trace - 1.0) <= 1e-12);
    for (double p : {s.rho11, s.rho22, s.rho33, s.rho44, s.rho55}) {
      CHECK(p >= -1e-12);
      CHECK(p <= 1.0 + 1e-12);
    }
    CHECK(s.rho_g == s.rho11 + s.rho22);
  }
}

TEST_CASE("resonant MW monotonically depletes the ground state") {
  const auto r = shipped();
  double prev = 2.0;
  for (int i = 0; i <= 50; ++i) {
    const double omega = 10.0 * i / 50.0;
    const auto s = steady_state(r, DrivePoint<double>{omega, kOpGammaP, 0});
    CHECK(s.rho_g <= prev + 1e-12);
    prev = s.rho_g;
  }
}

TEST_CASE("detuning profile is even and recovers monotonically") {
  const auto r = shipped();
  const double omega = 0.3;
  auto rho_g = [&](double delta) {
    return steady_state(r, DrivePoint<double>{omega, kOpGammaP, delta}).rho_g;
  };
  double prev = rho_g(0);
  for (int i = 1; i <= 40; ++i) {
    const double delta = 5.0 * i / 40.0;
    const double plus = rho_g(delta);
    const double minus = rho_g(-delta);
    CHECK(plus == doctest::Approx(minus).epsilon(1e-12).scale(0));
    CHECK(plus >= prev - 1e-14);  // the resonance dip fills back in
    prev = plus;
  }
}

// Eliminating the coherence in steady state gives an exact effective
// ground-doublet exchange rate W = omega^2 Gamma2 / (2 (Gamma2^2 + delta^2));
// the 5x5 rate-equation solve with that W must reproduce the populations.
TEST_CASE("effective-rate reduction matches the coherence solve") {
  const auto r = shipped();
  for (double delta : {0.0, 1.3}) {
    for (double omega : {0.05, 0.3, 2.0}) {
      const double gp = 0.4;
      const double g2 = gamma2_total(r, gp);
      const double w = omega * omega * g2 / (2.0 * (g2 * g2 + delta * delta));
      const double g1 = r.gamma1 * 1e-3;

      Eigen::Matrix<double, 5, 5> a = Eigen::Matrix<double, 5, 5>::Zero();
      a(0, 0) = -gp - g1 - w;
      a(0, 1) = g1 + w;
      a(0, 2) = r.k31;
      a(0, 4) = r.k51;
      a(1, 0) = g1 + w;
      a(1, 1) = -gp - g1 - w;
      a(1, 3) = r.k42;
      a(1, 4) = r.k52;
      a(2, 0) = gp;
      a(2, 2) = -(r.k31 + r.k35);
      a(3, 1) = gp;
      a(3, 3) = -(r.k42 + r.k45);
      a(4, 2) = r.k35;
      a(4, 3) = r.k45;
      a(4, 4) = -(r.k51 + r.k52);
      a.row(0) << 1, 1, 1, 1, 1;
      Eigen::Matrix<double, 5, 1> b = Eigen::Matrix<double, 5, 1>::Zero();
      b(0) = 1;
      const Eigen::Matrix<double, 5, 1> x = a.fullPivLu().solve(b);

      const auto s = steady_state(r, DrivePoint<double>{omega, gp, delta});
      CHECK(s.rho11 == doctest::Approx(x(0)).epsilon(1e-10).scale(0));
      CHECK(s.rho22 == doctest::Approx(x(1)).epsilon(1e-10).scale(0));
      CHECK(s.rho55 == doctest::Approx(x(4)).epsilon(1e-10).scale(0));
    }
  }
}

TEST_CASE("rank-deficient rate graph raises singular_system") {
  RateSet<double> r;
  r.k31 = r.k42 = r.k35 = r.k45 = r.k51 = r.k52 = 0;
  r.gamma1 = 0;
  r.gamma2_star = 1.0 / 3.0;
  // pumping with no decay path back leaves the shelf row identically zero
  CHECK_THROWS_AS(steady_state(r, DrivePoint<double>{0, 0.3, 0}), singular_system);
}

TEST_CASE("rate-set admissibility") {
  CHECK(rates_admissible(shipped()));

  RateSet<double> r = shipped();
  r.k35 = r.k45;  // shelving must favor the driven level
  CHECK_FALSE(rates_admissible(r));

  r = shipped();
  r.k51 = 5.0;
  r.k52 = 2.0;  // shelf lifetime below 150 ns
  CHECK_FALSE(rates_admissible(r));

  r = shipped();
  r.k31 = -1;
  CHECK_FALSE(rates_admissible(r));

  r = shipped();
  r.gamma2_star = std::numeric_limits<double>::infinity();
  CHECK_FALSE(rates_admissible(r));
}

TEST_CASE("ode oracle: pure relaxation holds the symmetric state") {
  RateSet<double> r;
  r.k31 = r.k42 = r.k35 = r.k45 = r.k51 = r.k52 = 0;
  r.gamma1 = 0.182;
  const double g1_mhz = r.gamma1 * 1e-3;
  const auto s = steady_state_ode_oracle(r, DrivePoint<double>{0, 0, 0}, 10.0 / g1_mhz, 0.25);
  check_close(s.rho11, 0.5, 1e-9);
  check_close(s.rho22, 0.5, 1e-9);
}

TEST_CASE("ode oracle: trace preserved and matches the linear solve") {
  const auto r = shipped();
  const DrivePoint<double> d{0.3, kOpGammaP, 0.4};
  // gamma1 = 0.182 kHz is the smallest nonzero rate; honor t_end >= 10/min
  const double t_end = 10.0 / (r.gamma1 * 1e-3);
  const double dt = 0.1 / r.k31;
  const auto ode = steady_state_ode_oracle(r, d, t_end, dt);
  const auto lin = steady_state(r, d);

  const double trace = ode.rho11 + ode.rho22 + ode.rho33 + ode.rho44 + ode.rho55;
  CHECK(std::abs(trace - 1.0) <= 1e-9);
  CHECK(std::abs(ode.rho11 - lin.rho11) <= 1e-8);
  CHECK(std::abs(ode.rho22 - lin.rho22) <= 1e-8);
  CHECK(std::abs(ode.rho33 - lin.rho33) <= 1e-8);
  CHECK(std::abs(ode.rho44 - lin.rho44) <= 1e-8);
  CHECK(std::abs(ode.rho55 - lin.rho55) <= 1e-8);
}

TEST_CASE("ode oracle: refusing an unconverged horizon") {
  const auto r = shipped();
  CHECK_THROWS_AS(steady_state_ode_oracle(r, DrivePoint<double>{0.3, 0.34, 0}, 0.2, 1e-3),
                  non_convergence);
  CHECK_THROWS_AS(steady_state_ode_oracle(r, DrivePoint<double>{0.3, 0.34, 0}, -1.0, 1e-3),
                  bad_params);
}
