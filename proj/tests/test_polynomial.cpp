#include <gtest/gtest.h>

#include <vector>

#include "gradtent/polynomial.hpp"

using namespace gradtent;

namespace {

Polynomial X() { return Polynomial::variable(2, 0); }
Polynomial Y() { return Polynomial::variable(2, 1); }
Polynomial C(const Rational& c) { return Polynomial::constant(2, c); }

}  // namespace

TEST(Monomial, DegreeProductAndDivision) {
  const Monomial a({2, 1}), b({0, 3});
  EXPECT_EQ(a.total_degree(), 3);
  EXPECT_EQ((a * b).exponents(), (std::vector<int>{2, 4}));
  EXPECT_TRUE((a * b).divisible_by(b));
  EXPECT_EQ((a * b) / b, a);
  EXPECT_FALSE(a.divisible_by(b));
}

TEST(Monomial, GrlexOrder) {
  GrlexLess less;
  EXPECT_TRUE(less(Monomial({0, 0}), Monomial({1, 0})));
  EXPECT_TRUE(less(Monomial({2, 0}), Monomial({0, 3})));
  EXPECT_FALSE(less(Monomial({1, 1}), Monomial({1, 1})));
}

TEST(Polynomial, RingAxioms) {
  const Polynomial p = X() * X() - Rational(3, 2) * Y() + C(1);
  const Polynomial q = X() * Y() + C(2);
  const Polynomial r = Y().pow(3) - X();
  EXPECT_EQ(p + q, q + p);
  EXPECT_EQ(p * q, q * p);
  EXPECT_EQ((p + q) + r, p + (q + r));
  EXPECT_EQ((p * q) * r, p * (q * r));
  EXPECT_EQ(p * (q + r), p * q + p * r);
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_EQ(p * C(1), p);
}

TEST(Polynomial, ZeroCoefficientsAreDropped) {
  const Polynomial p = X() + Y() - X();
  EXPECT_EQ(p.num_terms(), 1u);
  EXPECT_EQ(p, Y());
  EXPECT_EQ(Polynomial(2).degree(), kZeroDegree);
}

TEST(Polynomial, PowerAndDegree) {
  const Polynomial p = (X() + Y()).pow(3);
  EXPECT_EQ(p.degree(), 3);
  EXPECT_EQ(p.coefficient(Monomial({2, 1})), Rational(3));
  EXPECT_EQ(p.num_terms(), 4u);
  EXPECT_EQ(X().pow(0), C(1));
}

TEST(Polynomial, DerivativesAndGradient) {
  const Polynomial f = X().pow(4) * Y().pow(2) + X() * X() * Y().pow(4) - Rational(3) * X() * X() * Y() * Y() + C(1);
  const auto g = gradient(f);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0], Rational(4) * X().pow(3) * Y() * Y() + Rational(2) * X() * Y().pow(4) - Rational(6) * X() * Y() * Y());
  EXPECT_EQ(grad_norm_sq(f), g[0] * g[0] + g[1] * g[1]);
  EXPECT_TRUE(C(5).derivative(0).is_zero());
}

TEST(Polynomial, Evaluation) {
  const Polynomial f = X() * X() - Rational(1, 2) * X() * Y() + C(3);
  const std::vector<double> x = {2.0, -1.0};
  EXPECT_DOUBLE_EQ(f.evaluate(x), 4.0 + 1.0 + 3.0);
  const std::vector<Rational> xr = {Rational(1, 3), Rational(3)};
  EXPECT_EQ(f.evaluate_exact(xr), Rational(1, 9) - Rational(1, 2) + 3);
  EXPECT_DOUBLE_EQ(f.evaluate_abs(x), 4.0 + 1.0 + 3.0);
  const std::vector<double> bad = {1.0};
  EXPECT_THROW(f.evaluate(bad), DimensionError);
}

TEST(Polynomial, HomogeneousParts) {
  const Polynomial f = X().pow(3) + X() * Y() + Y() + C(7);
  const auto parts = f.homogeneous_parts();
  EXPECT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts.at(3), X().pow(3));
  EXPECT_EQ(parts.at(0), C(7));
  EXPECT_EQ(f.leading_form(), X().pow(3));
}

TEST(Polynomial, MixingRingsThrows) {
  EXPECT_THROW(X() + Polynomial::variable(3, 0), DimensionError);
}

TEST(Polynomial, NormOfX) {
  EXPECT_EQ(norm_sq_x(2), X() * X() + Y() * Y());
}

TEST(Polynomial, MaxAbsCoefficient) {
  const Polynomial f = Rational(-7, 2) * X() + Rational(3) * Y();
  EXPECT_EQ(f.max_abs_coefficient(), Rational(7, 2));
}
