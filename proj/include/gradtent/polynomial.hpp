#pragma once

// Sparse multivariate polynomials over the rationals.
//
// Coefficients are exact (GMP rationals).  Terms are kept in a map ordered by
// the graded order defined by GrlexLess, so every traversal is deterministic.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gradtent/error.hpp"

namespace gradtent {

using Rational = mpq_class;

/// Degree reported for the zero polynomial (stands in for minus infinity).
inline constexpr int kZeroDegree = std::numeric_limits<int>::min();

class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(int num_vars) : exponents_(static_cast<std::size_t>(num_vars), 0) {
    if (num_vars < 1) throw DimensionError("monomial needs at least one variable");
  }
  explicit Monomial(std::vector<int> exponents) : exponents_(std::move(exponents)) {
    if (exponents_.empty()) throw DimensionError("monomial needs at least one variable");
    for (int e : exponents_) {
      if (e < 0) throw Error("negative exponent in monomial");
      degree_ += e;
    }
  }

  static Monomial variable(int num_vars, int index, int power = 1) {
    Monomial m(num_vars);
    m.exponents_.at(static_cast<std::size_t>(index)) = power;
    m.degree_ = power;
    return m;
  }

  int num_vars() const noexcept { return static_cast<int>(exponents_.size()); }
  int total_degree() const noexcept { return degree_; }
  int operator[](int i) const { return exponents_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exponents() const noexcept { return exponents_; }
  bool is_constant() const noexcept { return degree_ == 0; }

  Monomial operator*(const Monomial& other) const {
    check_same(other);
    Monomial out = *this;
    for (std::size_t i = 0; i < exponents_.size(); ++i) out.exponents_[i] += other.exponents_[i];
    out.degree_ += other.degree_;
    return out;
  }

  /// True if every exponent of `other` is at most the matching exponent here.
  bool divisible_by(const Monomial& other) const {
    check_same(other);
    for (std::size_t i = 0; i < exponents_.size(); ++i)
      if (other.exponents_[i] > exponents_[i]) return false;
    return true;
  }

  Monomial operator/(const Monomial& other) const {
    if (!divisible_by(other)) throw Error("monomial division is not exact");
    Monomial out = *this;
    for (std::size_t i = 0; i < exponents_.size(); ++i) out.exponents_[i] -= other.exponents_[i];
    out.degree_ -= other.degree_;
    return out;
  }

  double evaluate(std::span<const double> x) const {
    double v = 1.0;
    for (std::size_t i = 0; i < exponents_.size(); ++i)
      for (int e = 0; e < exponents_[i]; ++e) v *= x[i];
    return v;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.exponents_ == b.exponents_; }

 private:
  void check_same(const Monomial& other) const {
    if (other.exponents_.size() != exponents_.size())
      throw DimensionError("monomials have different variable counts");
  }

  std::vector<int> exponents_;
  int degree_ = 0;
};

/// Graded order: lower total degree first; within one degree, X1 before X2
/// (so the degree-one monomials come out as x1, x2, ..., xn).
struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    if (a.total_degree() != b.total_degree()) return a.total_degree() < b.total_degree();
    return a.exponents() > b.exponents();
  }
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int e : m.exponents()) h = (h ^ static_cast<std::size_t>(e)) * 1099511628211ull;
    return h;
  }
};

class Polynomial {
 public:
  using TermMap = std::map<Monomial, Rational, GrlexLess>;

  explicit Polynomial(int num_vars = 1) : num_vars_(num_vars) {
    if (num_vars < 1) throw DimensionError("polynomial needs at least one variable");
  }

  static Polynomial constant(int num_vars, const Rational& c) {
    Polynomial p(num_vars);
    p.add_term(Monomial(num_vars), c);
    return p;
  }

  static Polynomial variable(int num_vars, int index) {
    if (index < 0 || index >= num_vars) throw DimensionError("variable index out of range");
    Polynomial p(num_vars);
    p.add_term(Monomial::variable(num_vars, index), 1);
    return p;
  }

  static Polynomial monomial(const Monomial& m, const Rational& c = 1) {
    Polynomial p(m.num_vars());
    p.add_term(m, c);
    return p;
  }

  int num_vars() const noexcept { return num_vars_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t num_terms() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_constant()); }

  /// Total degree, or kZeroDegree for the zero polynomial.
  int degree() const noexcept { return terms_.empty() ? kZeroDegree : terms_.rbegin()->first.total_degree(); }

  Rational coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  Rational constant_term() const { return coefficient(Monomial(num_vars_)); }

  /// Adds c * m in place; zero results are pruned.
  void add_term(const Monomial& m, const Rational& c) {
    if (m.num_vars() != num_vars_) throw DimensionError("monomial/polynomial variable count mismatch");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Rational max_abs_coefficient() const {
    Rational best = 0;
    for (const auto& [m, c] : terms_) best = std::max(best, Rational(abs(c)));
    return best;
  }

  Polynomial& operator+=(const Polynomial& q) {
    check_same(q);
    for (const auto& [m, c] : q.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& q) {
    check_same(q);
    for (const auto& [m, c] : q.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }
  Polynomial& operator*=(const Polynomial& q) { return *this = *this * q; }

  friend Polynomial operator+(Polynomial p, const Polynomial& q) { return p += q; }
  friend Polynomial operator-(Polynomial p, const Polynomial& q) { return p -= q; }
  friend Polynomial operator-(Polynomial p) { return p *= Rational(-1); }
  friend Polynomial operator*(Polynomial p, const Rational& s) { return p *= s; }
  friend Polynomial operator*(const Rational& s, Polynomial p) { return p *= s; }

  friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    p.check_same(q);
    Polynomial out(p.num_vars_);
    for (const auto& [mp, cp] : p.terms_)
      for (const auto& [mq, cq] : q.terms_) out.add_term(mp * mq, cp * cq);
    return out;
  }

  friend bool operator==(const Polynomial& p, const Polynomial& q) {
    return p.num_vars_ == q.num_vars_ && p.terms_ == q.terms_;
  }

  Polynomial pow(unsigned e) const {
    Polynomial result = constant(num_vars_, 1);
    Polynomial base = *this;
    while (e > 0) {
      if (e & 1u) result *= base;
      e >>= 1u;
      if (e > 0) base = base * base;
    }
    return result;
  }

  Polynomial derivative(int var) const {
    if (var < 0 || var >= num_vars_) throw DimensionError("derivative variable out of range");
    Polynomial out(num_vars_);
    for (const auto& [m, c] : terms_) {
      const int e = m[var];
      if (e == 0) continue;
      std::vector<int> ex = m.exponents();
      ex[static_cast<std::size_t>(var)] -= 1;
      out.add_term(Monomial(std::move(ex)), c * e);
    }
    return out;
  }

  /// Floating point evaluation; powers of each coordinate are tabulated once.
  double evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != num_vars_) throw DimensionError("point dimension does not match polynomial");
    if (terms_.empty()) return 0.0;
    const int deg = degree();
    std::vector<std::vector<double>> powers(x.size(), std::vector<double>(static_cast<std::size_t>(deg) + 1, 1.0));
    for (std::size_t i = 0; i < x.size(); ++i)
      for (int e = 1; e <= deg; ++e) powers[i][e] = powers[i][e - 1] * x[i];
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = c.get_d();
      for (std::size_t i = 0; i < x.size(); ++i) t *= powers[i][static_cast<std::size_t>(m[static_cast<int>(i)])];
      sum += t;
    }
    return sum;
  }

  /// Sum of |c_a x^a| over the terms; bounds |p(x)| and the rounding error scale.
  double evaluate_abs(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != num_vars_) throw DimensionError("point dimension does not match polynomial");
    double sum = 0.0;
    for (const auto& [m, c] : terms_) sum += std::abs(c.get_d() * m.evaluate(x));
    return sum;
  }

  Rational evaluate_exact(std::span<const Rational> x) const {
    if (static_cast<int>(x.size()) != num_vars_) throw DimensionError("point dimension does not match polynomial");
    Rational sum = 0;
    for (const auto& [m, c] : terms_) {
      Rational t = c;
      for (std::size_t i = 0; i < x.size(); ++i)
        for (int e = 0; e < m[static_cast<int>(i)]; ++e) t *= x[i];
      sum += t;
    }
    return sum;
  }

  /// Homogeneous components keyed by degree; their sum is the polynomial.
  std::map<int, Polynomial> homogeneous_parts() const {
    std::map<int, Polynomial> parts;
    for (const auto& [m, c] : terms_) {
      auto it = parts.try_emplace(m.total_degree(), num_vars_).first;
      it->second.add_term(m, c);
    }
    return parts;
  }

  Polynomial leading_form() const {
    if (is_zero()) throw Error("leading form of the zero polynomial is undefined");
    return homogeneous_parts().rbegin()->second;
  }

  std::string to_string(const std::vector<std::string>& names = {}) const;

 private:
  void check_same(const Polynomial& q) const {
    if (q.num_vars_ != num_vars_)
      throw DimensionError("polynomials have different variable counts (" + std::to_string(num_vars_) + " vs " +
                           std::to_string(q.num_vars_) + ")");
  }

  int num_vars_;
  TermMap terms_;
};

inline std::vector<Polynomial> gradient(const Polynomial& f) {
  std::vector<Polynomial> g;
  g.reserve(static_cast<std::size_t>(f.num_vars()));
  for (int i = 0; i < f.num_vars(); ++i) g.push_back(f.derivative(i));
  return g;
}

/// Sum of the squared partial derivatives.
inline Polynomial grad_norm_sq(const Polynomial& f) {
  Polynomial out(f.num_vars());
  for (const auto& d : gradient(f)) out += d * d;
  return out;
}

/// X_1^2 + ... + X_n^2.
inline Polynomial norm_sq_x(int n) {
  if (n < 1) throw DimensionError("norm_sq_x needs n >= 1");
  Polynomial out(n);
  for (int i = 0; i < n; ++i) out.add_term(Monomial::variable(n, i, 2), 1);
  return out;
}

inline std::vector<std::string> default_variable_names(int n) {
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

/// Renders terms highest degree first, e.g. "3/2*x1^2*x2 - x2^4 + 1".
inline std::string Polynomial::to_string(const std::vector<std::string>& names_in) const {
  const auto names = names_in.empty() ? default_variable_names(num_vars_) : names_in;
  if (static_cast<int>(names.size()) != num_vars_) throw DimensionError("variable name count mismatch");
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    Rational mag = abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    bool wrote = false;
    if (mag != 1 || m.is_constant()) {
      os << mag.get_str();
      wrote = true;
    }
    for (int i = 0; i < num_vars_; ++i) {
      if (m[i] == 0) continue;
      if (wrote) os << "*";
      os << names[static_cast<std::size_t>(i)];
      if (m[i] > 1) os << "^" << m[i];
      wrote = true;
    }
  }
  return os.str();
}

}  // namespace gradtent
