#pragma once

// Constraint polynomials for the feasible sets used by the relaxations:
//
//   principal{R}:   R - |grad f|^2 |x|^2                      >= 0
//   higher{N}:      1 - |grad f|^(2N) (1 + |x|^2)^(N+1)        >= 0
//   ball{R}:        R^2 - |x|^2                               >= 0
//   gradient variety: df/dx_i = 0 for all i
//
// For every f and N the real gradient variety sits inside higher{N}, which
// sits inside higher{N+1}, which sits inside principal{1}.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradtent/error.hpp"
#include "gradtent/polynomial.hpp"

namespace gradtent {

enum class TentacleKind { none, principal, higher, ball, gradient_variety };

inline std::string to_string(TentacleKind kind) {
  switch (kind) {
    case TentacleKind::none: return "none";
    case TentacleKind::principal: return "principal";
    case TentacleKind::higher: return "higher";
    case TentacleKind::ball: return "ball";
    case TentacleKind::gradient_variety: return "gradient_variety";
  }
  return "unknown";
}

struct ConstraintSet {
  std::vector<Polynomial> inequalities;  // g_j(x) >= 0
  std::vector<Polynomial> equalities;    // h_i(x) = 0
};

inline constexpr double kDefaultMembershipTol = 1e-9;

inline Polynomial principal_constraint(const Polynomial& f, const Rational& radius = 1) {
  if (radius <= 0) throw Error("tentacle radius must be positive");
  return Polynomial::constant(f.num_vars(), radius) - grad_norm_sq(f) * norm_sq_x(f.num_vars());
}

inline Polynomial higher_constraint(const Polynomial& f, int order) {
  if (order < 1) throw Error("higher tentacle order must be at least 1");
  const int n = f.num_vars();
  const Polynomial one = Polynomial::constant(n, 1);
  const Polynomial grad_part = grad_norm_sq(f).pow(static_cast<unsigned>(order));
  const Polynomial radial = (one + norm_sq_x(n)).pow(static_cast<unsigned>(order + 1));
  return one - grad_part * radial;
}

inline Polynomial ball_constraint(int n, const Rational& radius) {
  if (n < 1) throw DimensionError("ball constraint needs n >= 1");
  if (radius <= 0) throw Error("ball radius must be positive");
  return Polynomial::constant(n, radius * radius) - norm_sq_x(n);
}

inline ConstraintSet gradient_variety_constraints(const Polynomial& f) {
  return ConstraintSet{{}, gradient(f)};
}

/// Radius heuristic: max(1, largest |coefficient| of |grad f|^2 |x|^2).
inline Rational auto_scale_radius(const Polynomial& f) {
  const Rational c = (grad_norm_sq(f) * norm_sq_x(f.num_vars())).max_abs_coefficient();
  return c > 1 ? c : Rational(1);
}

class TentacleSpec {
 public:
  static TentacleSpec none(Polynomial f) { return TentacleSpec(TentacleKind::none, std::move(f), 1, 1); }
  static TentacleSpec principal(Polynomial f, const Rational& radius = 1) {
    if (radius <= 0) throw Error("tentacle radius must be positive");
    return TentacleSpec(TentacleKind::principal, std::move(f), radius, 1);
  }
  static TentacleSpec higher(Polynomial f, int order) {
    if (order < 1) throw Error("higher tentacle order must be at least 1");
    return TentacleSpec(TentacleKind::higher, std::move(f), 1, order);
  }
  static TentacleSpec ball(Polynomial f, const Rational& radius) {
    if (radius <= 0) throw Error("ball radius must be positive");
    return TentacleSpec(TentacleKind::ball, std::move(f), radius, 1);
  }
  static TentacleSpec gradient_variety(Polynomial f) {
    return TentacleSpec(TentacleKind::gradient_variety, std::move(f), 1, 1);
  }

  TentacleKind kind() const noexcept { return kind_; }
  const Polynomial& source() const noexcept { return f_; }
  const Rational& radius() const noexcept { return radius_; }
  int order() const noexcept { return order_; }

  ConstraintSet constraints() const {
    switch (kind_) {
      case TentacleKind::none: return {};
      case TentacleKind::principal: return {{principal_constraint(f_, radius_)}, {}};
      case TentacleKind::higher: return {{higher_constraint(f_, order_)}, {}};
      case TentacleKind::ball: return {{ball_constraint(f_.num_vars(), radius_)}, {}};
      case TentacleKind::gradient_variety: return gradient_variety_constraints(f_);
    }
    return {};
  }

  /// The single inequality polynomial g of the inequality kinds.
  std::optional<Polynomial> inequality() const {
    auto cs = constraints();
    if (cs.inequalities.empty()) return std::nullopt;
    return cs.inequalities.front();
  }

 private:
  TentacleSpec(TentacleKind kind, Polynomial f, Rational radius, int order)
      : kind_(kind), f_(std::move(f)), radius_(std::move(radius)), order_(order) {}

  TentacleKind kind_;
  Polynomial f_;
  Rational radius_;
  int order_;
};

/// Membership test: g(x) >= -tol for inequality kinds, max |df/dx_i(x)| <= tol
/// for the gradient variety.  Kind `none` contains every point.
class TentacleMembership {
 public:
  explicit TentacleMembership(const TentacleSpec& spec) : kind_(spec.kind()), n_(spec.source().num_vars()) {
    auto cs = spec.constraints();
    polys_ = kind_ == TentacleKind::gradient_variety ? std::move(cs.equalities) : std::move(cs.inequalities);
  }

  bool contains(std::span<const double> x, double tol = kDefaultMembershipTol) const {
    if (static_cast<int>(x.size()) != n_) throw DimensionError("point dimension does not match tentacle");
    if (kind_ == TentacleKind::gradient_variety) {
      double worst = 0.0;
      for (const auto& d : polys_) worst = std::max(worst, std::abs(d.evaluate(x)));
      return worst <= tol;
    }
    for (const auto& g : polys_)
      if (g.evaluate(x) < -tol) return false;
    return true;
  }

  /// Value of the inequality polynomial (0 if there is none).
  double slack(std::span<const double> x) const {
    if (kind_ == TentacleKind::gradient_variety || polys_.empty()) return 0.0;
    return polys_.front().evaluate(x);
  }

 private:
  TentacleKind kind_;
  int n_;
  std::vector<Polynomial> polys_;
};

inline bool contains(const TentacleSpec& spec, std::span<const double> x, double tol = kDefaultMembershipTol) {
  return TentacleMembership(spec).contains(x, tol);
}

}  // namespace gradtent
