#pragma once

// Brute-force minimization used as ground truth in tests: exhaustive grids,
// tentacle-filtered grids and multistart gradient descent.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gradtent/error.hpp"
#include "gradtent/polynomial.hpp"
#include "gradtent/tentacle.hpp"

namespace gradtent {

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box cube(int n, double half_width) {
    return {std::vector<double>(static_cast<std::size_t>(n), -half_width),
            std::vector<double>(static_cast<std::size_t>(n), half_width)};
  }
  int dim() const noexcept { return static_cast<int>(lower.size()); }
  void validate(int n) const {
    if (lower.size() != upper.size() || dim() != n) throw DimensionError("box dimension does not match polynomial");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] <= upper[i])) throw Error("box lower bound exceeds upper bound");
  }
};

struct OracleResult {
  double min_value = std::numeric_limits<double>::infinity();
  std::vector<double> argmin;
  std::int64_t points_evaluated = 0;
};

inline constexpr double kMaxGridPoints = 1e8;

namespace detail {

/// Visits every grid point in lexicographic order.
template <class Visit>
void for_each_grid_point(const Box& box, int resolution, Visit&& visit) {
  const int n = box.dim();
  if (resolution < 2) throw Error("grid resolution must be at least 2");
  if (std::pow(static_cast<double>(resolution), n) > kMaxGridPoints)
    throw BudgetError("grid of " + std::to_string(resolution) + "^" + std::to_string(n) + " points exceeds 1e8");
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> x(static_cast<std::size_t>(n));
  auto coord = [&](int i) {
    const auto u = static_cast<std::size_t>(i);
    return box.lower[u] + (box.upper[u] - box.lower[u]) * idx[u] / (resolution - 1);
  };
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = coord(i);
  while (true) {
    visit(std::span<const double>(x));
    int i = n - 1;
    while (i >= 0 && ++idx[static_cast<std::size_t>(i)] == resolution) {
      idx[static_cast<std::size_t>(i)] = 0;
      x[static_cast<std::size_t>(i)] = coord(i);
      --i;
    }
    if (i < 0) break;
    x[static_cast<std::size_t>(i)] = coord(i);
  }
}

}  // namespace detail

inline OracleResult grid_min(const Polynomial& f, const Box& box, int resolution) {
  box.validate(f.num_vars());
  OracleResult r;
  detail::for_each_grid_point(box, resolution, [&](std::span<const double> x) {
    ++r.points_evaluated;
    const double v = f.evaluate(x);
    if (v < r.min_value) {
      r.min_value = v;
      r.argmin.assign(x.begin(), x.end());
    }
  });
  return r;
}

/// Grid restricted to the points of the tentacle set.  Throws if no grid
/// point belongs to it.
inline OracleResult tentacle_grid_min(const Polynomial& f, const TentacleSpec& spec, const Box& box, int resolution,
                                      double tol = kDefaultMembershipTol) {
  box.validate(f.num_vars());
  const TentacleMembership member(spec);
  OracleResult r;
  detail::for_each_grid_point(box, resolution, [&](std::span<const double> x) {
    ++r.points_evaluated;
    if (!member.contains(x, tol)) return;
    const double v = f.evaluate(x);
    if (v < r.min_value) {
      r.min_value = v;
      r.argmin.assign(x.begin(), x.end());
    }
  });
  if (r.argmin.empty()) throw Error("no grid point lies in the tentacle set");
  return r;
}

/// Projected gradient descent with Armijo backtracking (constant 1e-4,
/// shrink 0.5, initial step 1) from `starts` uniform random points.
inline OracleResult multistart_descent(const Polynomial& f, const Box& box, int starts, int max_steps,
                                       std::uint64_t seed) {
  const int n = f.num_vars();
  box.validate(n);
  if (starts < 1) throw Error("multistart needs at least one start");
  const std::vector<Polynomial> grad = gradient(f);
  std::mt19937_64 rng(seed);
  OracleResult best;
  std::vector<double> x(static_cast<std::size_t>(n)), g(x.size()), trial(x.size());
  auto project = [&](std::vector<double>& p) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], box.lower[i], box.upper[i]);
  };
  for (int s = 0; s < starts; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::uniform_real_distribution<double>(box.lower[i], box.upper[i])(rng);
    double fx = f.evaluate(x);
    ++best.points_evaluated;
    for (int step = 0; step < max_steps; ++step) {
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = grad[i].evaluate(x);
      double t = 1.0;
      bool moved = false;
      for (int shrink = 0; shrink < 60; ++shrink, t *= 0.5) {
        for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - t * g[i];
        project(trial);
        double decrease = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) decrease += g[i] * (x[i] - trial[i]);
        if (decrease <= 0.0) break;
        const double ft = f.evaluate(trial);
        ++best.points_evaluated;
        if (ft <= fx - 1e-4 * decrease) {
          x.swap(trial);
          fx = ft;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (fx < best.min_value) {
      best.min_value = fx;
      best.argmin = x;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Curve limit of the gradient tentacle example
//
// f = (X + X^2 Y + X^4 Y Z)^2 along gamma(s) = (s, 2a/s^2, -(1 + s/(4a))/(2 s^2)).
// Closed forms: f(gamma(s)) = (3s/4 + a)^2 and, as s -> 0,
// |grad f|^2 |x|^2 -> (16a^2 + 1) a^2 (1/4 + 4a^2).

struct CurveLimitRow {
  double a = 0.0;
  double s = 0.0;
  double f_value = 0.0;
  double f_expected = 0.0;
  double f_rel_error = 0.0;
  double grad_value = 0.0;
  double grad_limit = 0.0;
  double grad_rel_error = 0.0;
  double dfdx = 0.0;  // vanishes identically on the curve
};

struct CurveLimitReport {
  std::vector<CurveLimitRow> rows;
  double f_tol = 1e-10;
  double grad_tol = 1e-4;
  bool f_ok = true;
  bool grad_ok = true;
  bool dfdx_zero = true;
};

inline Polynomial curve_limit_polynomial() {
  const Polynomial X = Polynomial::variable(3, 0), Y = Polynomial::variable(3, 1), Z = Polynomial::variable(3, 2);
  const Polynomial h = X + X * X * Y + X.pow(4) * Y * Z;
  return h * h;
}

/// Evaluates in exact rational arithmetic at the given s and a values
/// (as rationals num/den).
inline CurveLimitReport curve_limit_check(const std::vector<Rational>& a_values = {Rational(1, 20), Rational(1, 10)},
                                          const Rational& s = Rational(1, 1000), double f_tol = 1e-10,
                                          double grad_tol = 1e-4) {
  const Polynomial f = curve_limit_polynomial();
  const std::vector<Polynomial> grad = gradient(f);
  CurveLimitReport rep;
  rep.f_tol = f_tol;
  rep.grad_tol = grad_tol;
  for (const Rational& a : a_values) {
    const Rational s2 = s * s;
    std::vector<Rational> x = {s, 2 * a / s2, -(1 + s / (4 * a)) / (2 * s2)};
    for (auto& v : x) v.canonicalize();
    const Rational fv = f.evaluate_exact(x);
    const Rational fe = (Rational(3, 4) * s + a) * (Rational(3, 4) * s + a);
    Rational g2 = 0, x2 = 0;
    for (const auto& d : grad) {
      const Rational dv = d.evaluate_exact(x);
      g2 += dv * dv;
    }
    for (const auto& v : x) x2 += v * v;
    const Rational gv = g2 * x2;
    const Rational gl = (16 * a * a + 1) * a * a * (Rational(1, 4) + 4 * a * a);
    CurveLimitRow row;
    row.a = a.get_d();
    row.s = s.get_d();
    row.f_value = fv.get_d();
    row.f_expected = fe.get_d();
    row.f_rel_error = Rational(abs(fv - fe) / fe).get_d();
    row.grad_value = gv.get_d();
    row.grad_limit = gl.get_d();
    row.grad_rel_error = Rational(abs(gv - gl) / gl).get_d();
    row.dfdx = grad[0].evaluate_exact(x).get_d();
    rep.f_ok = rep.f_ok && row.f_rel_error <= f_tol;
    rep.grad_ok = rep.grad_ok && row.grad_rel_error <= grad_tol;
    rep.dfdx_zero = rep.dfdx_zero && row.dfdx == 0.0;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace gradtent
