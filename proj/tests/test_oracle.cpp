#include <gtest/gtest.h>

#include "gradtent/oracle.hpp"
#include "gradtent/parser.hpp"

using namespace gradtent;

namespace {

Polynomial parse(const std::string& s, std::vector<std::string> vars = {}) {
  return parse_polynomial(s, std::move(vars)).polynomial;
}

}  // namespace

TEST(Oracle, GridFindsExactMinimizer) {
  const OracleResult r = grid_min(parse("(x - 1)^2 + (y + 0.5)^2 + 3", {"x", "y"}), Box::cube(2, 2), 9);
  EXPECT_DOUBLE_EQ(r.min_value, 3.0);
  EXPECT_EQ(r.argmin, (std::vector<double>{1.0, -0.5}));
  EXPECT_EQ(r.points_evaluated, 81);
}

TEST(Oracle, NestedGridsAreMonotone) {
  const Polynomial f = parse("x^4 + y^4 - 3*x*y + x - 0.3*y", {"x", "y"});
  double prev = std::numeric_limits<double>::infinity();
  for (int r : {11, 21, 41, 81, 161}) {
    const double v = grid_min(f, Box::cube(2, 3), r).min_value;
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Oracle, MotzkinMinimum) {
  const Polynomial f = parse("x^4*y^2 + x^2*y^4 - 3*x^2*y^2 + 1", {"x", "y"});
  EXPECT_NEAR(grid_min(f, Box::cube(2, 2), 401).min_value, 0.0, 1e-12);
}

TEST(Oracle, MultistartDescent) {
  const Polynomial f = parse("(x^2 + 1)^2 + (y^2 + 1)^2 - 2*(x + y + 1)^2", {"x", "y"});
  const OracleResult r = multistart_descent(f, Box::cube(2, 5), 20, 2000, 7);
  EXPECT_NEAR(r.min_value, -11.4581, 1e-3);
  EXPECT_LE(r.min_value, grid_min(f, Box::cube(2, 5), 201).min_value + 1e-9);
}

TEST(Oracle, TentacleGrid) {
  // f = x on {1 - x^2 >= 0}
  const Polynomial f = parse("x");
  const OracleResult r = tentacle_grid_min(f, TentacleSpec::principal(f), Box::cube(1, 3), 601);
  EXPECT_NEAR(r.min_value, -1.0, 1e-12);
  EXPECT_THROW(tentacle_grid_min(f, TentacleSpec::ball(f, Rational(1, 1000)), Box({{2.0}, {3.0}}), 11), Error);
}

TEST(Oracle, Budget) {
  const Polynomial f = parse("x1 + x2 + x3 + x4 + x5");
  EXPECT_THROW(grid_min(f, Box::cube(5, 1), 100), BudgetError);
  EXPECT_THROW(grid_min(f, Box::cube(4, 1), 10), DimensionError);
  EXPECT_THROW(grid_min(f, Box::cube(5, 1), 1), Error);
}

TEST(Oracle, CurveLimit) {
  const CurveLimitReport rep = curve_limit_check();
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_TRUE(rep.f_ok);
  EXPECT_TRUE(rep.dfdx_zero);
  for (const auto& row : rep.rows) {
    EXPECT_LE(row.f_rel_error, 1e-10);
    EXPECT_GT(row.grad_value, 0.0);
  }
  // The first-order term in s shrinks the gradient error with s.
  const CurveLimitReport fine = curve_limit_check({Rational(1, 20)}, Rational(1, 100000));
  EXPECT_LT(fine.rows[0].grad_rel_error, rep.rows[0].grad_rel_error);
}
