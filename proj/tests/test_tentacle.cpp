#include <gtest/gtest.h>

#include <vector>

#include "gradtent/parser.hpp"
#include "gradtent/tentacle.hpp"

using namespace gradtent;

namespace {

Polynomial motzkin() { return parse_polynomial("x^4*y^2 + x^2*y^4 - 3*x^2*y^2 + 1", {"x", "y"}).polynomial; }

}  // namespace

TEST(Tentacle, PrincipalConstraint) {
  const Polynomial f = parse_polynomial("x^2", {"x"}).polynomial;
  const Polynomial g = principal_constraint(f, 2);
  // 2 - (2x)^2 x^2
  EXPECT_EQ(g, parse_polynomial("2 - 4*x^4", {"x"}).polynomial);
  EXPECT_THROW(principal_constraint(f, 0), Error);
}

TEST(Tentacle, HigherConstraint) {
  const Polynomial f = parse_polynomial("x", {"x"}).polynomial;
  EXPECT_EQ(higher_constraint(f, 1), parse_polynomial("1 - (1 + x^2)^2", {"x"}).polynomial);
  EXPECT_EQ(higher_constraint(f, 2), parse_polynomial("1 - (1 + x^2)^3", {"x"}).polynomial);
  EXPECT_THROW(higher_constraint(f, 0), Error);
}

TEST(Tentacle, BallAndGradientVariety) {
  EXPECT_EQ(ball_constraint(2, 3), parse_polynomial("9 - x^2 - y^2", {"x", "y"}).polynomial);
  const auto cs = gradient_variety_constraints(motzkin());
  EXPECT_TRUE(cs.inequalities.empty());
  EXPECT_EQ(cs.equalities.size(), 2u);
}

TEST(Tentacle, MotzkinConstraintDegree) {
  EXPECT_EQ(principal_constraint(motzkin()).degree(), 12);
}

TEST(Tentacle, MembershipOfCriticalPoints) {
  const Polynomial f = motzkin();
  const std::vector<double> minimizer = {1.0, 1.0};
  const std::vector<double> far = {3.0, 0.5};
  for (const auto& spec : {TentacleSpec::principal(f), TentacleSpec::higher(f, 1), TentacleSpec::higher(f, 3),
                           TentacleSpec::gradient_variety(f)}) {
    EXPECT_TRUE(contains(spec, minimizer)) << to_string(spec.kind());
    EXPECT_FALSE(contains(spec, far)) << to_string(spec.kind());
  }
  EXPECT_TRUE(contains(TentacleSpec::none(f), far));
  EXPECT_TRUE(contains(TentacleSpec::ball(f, 4), far));
  EXPECT_FALSE(contains(TentacleSpec::ball(f, 1), far));
}

TEST(Tentacle, HigherSetsAreNested) {
  // {g_N >= 0} grows with N on random points.
  const Polynomial f = parse_polynomial("x^4 + y^4 - x*y + x", {"x", "y"}).polynomial;
  const TentacleMembership s1(TentacleSpec::higher(f, 1)), s2(TentacleSpec::higher(f, 2)), s3(TentacleSpec::higher(f, 3));
  int inside1 = 0;
  for (int i = -40; i <= 40; ++i)
    for (int j = -40; j <= 40; ++j) {
      const std::vector<double> x = {i / 20.0, j / 20.0};
      if (s1.contains(x, 0.0)) {
        ++inside1;
        EXPECT_TRUE(s2.contains(x, 0.0));
      }
      if (s2.contains(x, 0.0)) EXPECT_TRUE(s3.contains(x, 0.0));
    }
  EXPECT_GT(inside1, 0);
}

TEST(Tentacle, AutoScaleRadius) {
  EXPECT_EQ(auto_scale_radius(parse_polynomial("x^2/10", {"x"}).polynomial), Rational(1));
  // |grad f|^2 |x|^2 = 100 x^4
  EXPECT_EQ(auto_scale_radius(parse_polynomial("5*x^2", {"x"}).polynomial), Rational(100));
}

TEST(Tentacle, DimensionMismatch) {
  const std::vector<double> x = {1.0};
  EXPECT_THROW(contains(TentacleSpec::principal(motzkin()), x), DimensionError);
}
