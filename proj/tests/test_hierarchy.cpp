#include <gtest/gtest.h>

#include <cmath>

#include "gradtent/hierarchy.hpp"
#include "gradtent/parser.hpp"

using namespace gradtent;

namespace {

Polynomial parse(const std::string& s, std::vector<std::string> vars = {}) {
  return parse_polynomial(s, std::move(vars)).polynomial;
}

}  // namespace

TEST(Hierarchy, MethodNames) {
  for (Method m : {Method::sos, Method::principal, Method::higher, Method::ball, Method::gradvar})
    EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_THROW(method_from_string("bogus"), Error);
}

TEST(Hierarchy, UnboundedLinearFunctionOnTentacle) {
  // f = x is unbounded below but has infimum -1 on the principal tentacle.
  const HierarchyReport rep = run_family(parse("x"), MethodSpec::principal(), 2, {}, false);
  ASSERT_EQ(rep.results.size(), 3u);
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& r : rep.results) {
    ASSERT_TRUE(r.finite()) << status_label(r);
    EXPECT_GE(r.value, prev - chain_tolerance(r.value));
    EXPECT_LE(r.value, -1.0 + 1e-4);
    prev = r.value;
  }
  EXPECT_NEAR(rep.results.back().value, -1.0, 1e-4);
  EXPECT_TRUE(rep.chain_violations.empty());
}

TEST(Hierarchy, ChainOnQuartic) {
  const HierarchyReport rep = run_family(parse("x^4 + y^4 - x*y + x", {"x", "y"}), MethodSpec::principal(), 2);
  ASSERT_EQ(rep.results.size(), 4u);
  EXPECT_EQ(rep.results[0].spec.method, Method::sos);
  for (const auto& r : rep.results) EXPECT_EQ(r.solution.status, SolveStatus::optimal);
  EXPECT_TRUE(rep.chain_violations.empty());
  for (std::size_t i = 1; i < rep.results.size(); ++i)
    EXPECT_GE(rep.results[i].value, rep.results[i - 1].value - chain_tolerance(rep.results[i].value));
}

TEST(Hierarchy, HigherTentacleOnSquaredNorm) {
  const RelaxationResult r = compute_higher(parse("x^2 + y^2", {"x", "y"}), 1, 0);
  ASSERT_TRUE(r.finite()) << status_label(r);
  EXPECT_NEAR(r.value, 0.0, 1e-6);
}

TEST(Hierarchy, BallRelaxation) {
  const RelaxationResult r = compute_ball(parse("x"), 2, 0);
  ASSERT_TRUE(r.finite()) << status_label(r);
  EXPECT_NEAR(r.value, -2.0, 1e-5);
}

TEST(Hierarchy, GradientVarietyExact) {
  const RelaxationResult r = compute_gradvar(parse("x^4 - 2*x^2"), 2);
  ASSERT_TRUE(r.finite()) << status_label(r);
  EXPECT_NEAR(r.value, -1.0, 1e-5);
}

TEST(Hierarchy, LevelInequalityUnivariate) {
  const LevelInequalityReport rep = check_level_inequality(parse("x^4 - x"), 1, 0);
  EXPECT_EQ(rep.half_degree, 2);
  ASSERT_TRUE(rep.decided);
  EXPECT_TRUE(rep.holds) << rep.margin;
}

TEST(Hierarchy, BudgetIsReportedPerLevel) {
  RunSettings run;
  run.solver.max_block_dim = 5;
  const HierarchyReport rep = run_family(parse("x^4 + y^4", {"x", "y"}), MethodSpec::principal(), 0, run);
  for (const auto& r : rep.results) {
    EXPECT_TRUE(r.over_budget);
    EXPECT_EQ(status_label(r), "budget_exceeded");
    EXPECT_TRUE(std::isnan(r.value));
  }
}

TEST(Hierarchy, ReportJsonRoundTrip) {
  const HierarchyReport rep = run_family(parse("x^4 - x"), MethodSpec::principal(), 1, {}, true, {"x"});
  const nlohmann::json j = to_json(rep, false);
  const HierarchyReport back = hierarchy_report_from_json(nlohmann::json::parse(j.dump()));
  ASSERT_EQ(back.results.size(), rep.results.size());
  for (std::size_t i = 0; i < rep.results.size(); ++i) {
    EXPECT_EQ(back.results[i].spec, rep.results[i].spec);
    EXPECT_EQ(back.results[i].level, rep.results[i].level);
    EXPECT_DOUBLE_EQ(back.results[i].value, rep.results[i].value);
  }
  EXPECT_EQ(to_json(back, false).dump(), j.dump());
}

TEST(Hierarchy, ReportsAreReproducible) {
  const Polynomial f = parse("x^4 + y^4 - x*y + x", {"x", "y"});
  const auto a = to_json(run_family(f, MethodSpec::principal(), 1), false).dump();
  const auto b = to_json(run_family(f, MethodSpec::principal(), 1), false).dump();
  EXPECT_EQ(a, b);
}

TEST(Hierarchy, TableMentionsEveryLevel) {
  const HierarchyReport rep = run_family(parse("x^2"), MethodSpec::principal(), 1);
  const std::string t = format_table(rep, false);
  EXPECT_NE(t.find("sos"), std::string::npos);
  EXPECT_NE(t.find("principal"), std::string::npos);
}
