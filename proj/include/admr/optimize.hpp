#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "admr/errors.hpp"

namespace admr {

// One sweep axis for coarse-to-fine minimization. An axis with a single
// value is held fixed; swept axes shrink around the incumbent each round.
struct RefineAxis {
  Eigen::VectorXd values;
  double lo = 0, hi = 0;   // hard bounds; refinement never leaves them
  bool log_scale = false;  // refine in log space (concentration axis)

  bool swept() const { return values.size() > 1; }

  static RefineAxis fixed(double v) {
    RefineAxis a;
    a.values = Eigen::VectorXd::Constant(1, v);
    a.lo = a.hi = v;
    return a;
  }

  static RefineAxis linear(double lo, double hi, long n) {
    if (n < 1) throw config_error("axis needs at least one point");
    RefineAxis a;
    a.values = Eigen::VectorXd::LinSpaced(n, lo, hi);
    a.lo = lo;
    a.hi = hi;
    return a;
  }

  static RefineAxis logarithmic(double lo, double hi, long n) {
    if (n < 1) throw config_error("axis needs at least one point");
    if (!(lo > 0) || !(hi > 0)) throw config_error("log axis needs positive bounds");
    RefineAxis a;
    a.values = Eigen::ArrayXd::LinSpaced(n, std::log(lo), std::log(hi)).exp().matrix();
    a.lo = lo;
    a.hi = hi;
    a.log_scale = true;
    return a;
  }

  double spacing() const {
    if (!swept()) return 0;
    return log_scale ? std::log(values(1)) - std::log(values(0)) : values(1) - values(0);
  }

  // n points across [center - span, center + span], clipped to [lo, hi]
  RefineAxis zoomed(double center, double span, long n) const {
    RefineAxis a = *this;
    if (!swept()) return a;
    const double c = log_scale ? std::log(center) : center;
    const double l = log_scale ? std::log(lo) : lo;
    const double h = log_scale ? std::log(hi) : hi;
    const double new_lo = std::max(l, c - span);
    const double new_hi = std::min(h, c + span);
    Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(n, new_lo, new_hi);
    if (log_scale) grid = grid.exp();
    a.values = grid.matrix();
    return a;
  }
};

struct GridOptimum {
  double a = 0, b = 0, c = 0;  // coordinates of the best cell
  double value = std::numeric_limits<double>::quiet_NaN();
  long evaluations = 0;
  bool found = false;
};

// Minimize batch-evaluated objective over the product grid a x b x c
// (row-major), then `rounds` of local refinement, each `refine` times finer
// around the incumbent. The batch callback maps three axes to objective
// values (NaN = infeasible point). The incumbent is global across rounds, so
// refinement can only improve on the coarse optimum.
template <typename BatchF>
GridOptimum grid_refine(RefineAxis a, RefineAxis b, RefineAxis c, BatchF&& batch, long rounds,
                        long refine) {
  if (rounds < 0 || refine < 1) throw config_error("refinement needs rounds >= 0 and refine >= 1");
  GridOptimum best;

  auto evaluate = [&](const RefineAxis& A, const RefineAxis& B, const RefineAxis& C) {
    const Eigen::VectorXd vals = batch(A.values, B.values, C.values);
    const Eigen::Index nb = B.values.size(), nc = C.values.size();
    if (vals.size() != A.values.size() * nb * nc)
      throw config_error("objective returned a wrong-sized batch");
    best.evaluations += vals.size();
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      const double v = vals(i);
      if (std::isnan(v)) continue;
      if (!best.found || v < best.value) {
        best.found = true;
        best.value = v;
        best.a = A.values(i / (nb * nc));
        best.b = B.values((i / nc) % nb);
        best.c = C.values(i % nc);
      }
    }
  };

  evaluate(a, b, c);
  if (!best.found) return best;

  for (long r = 0; r < rounds; ++r) {
    const long n = 2 * refine + 1;
    RefineAxis za = a.zoomed(best.a, a.spacing(), n);
    RefineAxis zb = b.zoomed(best.b, b.spacing(), n);
    RefineAxis zc = c.zoomed(best.c, c.spacing(), n);
    evaluate(za, zb, zc);
    a = za;
    b = zb;
    c = zc;
  }
  return best;
}

}  // namespace admr
