#include <gtest/gtest.h>

#include "gradtent/parser.hpp"

using namespace gradtent;

TEST(Parser, DetectsVariablesInOrder) {
  const auto p = parse_polynomial("y^2 + x*y + z");
  EXPECT_EQ(p.variables, (std::vector<std::string>{"y", "x", "z"}));
  EXPECT_EQ(p.polynomial.num_vars(), 3);
}

TEST(Parser, ExplicitVariableOrder) {
  const auto p = parse_polynomial("x^4*y^2 + x^2*y^4 - 3*x^2*y^2 + 1", {"x", "y"});
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  EXPECT_EQ(p.polynomial, x.pow(4) * y.pow(2) + x.pow(2) * y.pow(4) - Rational(3) * x.pow(2) * y.pow(2) +
                              Polynomial::constant(2, 1));
}

TEST(Parser, PrecedenceAndParentheses) {
  const auto p = parse_polynomial("(1 - x*y)^2 + y^2", {"x", "y"});
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  const Polynomial one = Polynomial::constant(2, 1);
  EXPECT_EQ(p.polynomial, (one - x * y).pow(2) + y * y);
  EXPECT_EQ(parse_polynomial("-x^2", {"x"}).polynomial, -Polynomial::variable(1, 0).pow(2));
  EXPECT_EQ(parse_polynomial("2*3^2", {"x"}).polynomial, Polynomial::constant(1, 18));
}

TEST(Parser, DecimalsAreExact) {
  const auto p = parse_polynomial("0.1*x + 1.5e-2", {"x"});
  EXPECT_EQ(p.polynomial.coefficient(Monomial(std::vector<int>{1})), Rational(1, 10));
  EXPECT_EQ(p.polynomial.constant_term(), Rational(3, 200));
  EXPECT_EQ(parse_polynomial("3/4*x", {"x"}).polynomial.coefficient(Monomial(std::vector<int>{1})), Rational(3, 4));
}

TEST(Parser, ConstantOnlyInput) {
  const auto p = parse_polynomial("42");
  EXPECT_EQ(p.variables, (std::vector<std::string>{"x1"}));
  EXPECT_EQ(p.polynomial.constant_term(), Rational(42));
}

TEST(Parser, RoundTripThroughText) {
  const auto p = parse_polynomial("x^4 + x^2 + z^6 - 3*x^2*z^2", {"x", "z"});
  const auto q = parse_polynomial(p.polynomial.to_string(p.variables), p.variables);
  EXPECT_EQ(p.polynomial, q.polynomial);
}

TEST(Parser, Errors) {
  EXPECT_THROW(parse_polynomial("x^2 +* y"), ParseError);
  EXPECT_THROW(parse_polynomial("(x + 1"), ParseError);
  EXPECT_THROW(parse_polynomial("x^-1"), ParseError);
  EXPECT_THROW(parse_polynomial("x + w", {"x", "y"}), ParseError);
  EXPECT_THROW(parse_polynomial("x", {"x", "x"}), ParseError);
  try {
    parse_polynomial("x + $", {"x"});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
}
