#include <gtest/gtest.h>

#include <set>

#include "gradtent/benchmark.hpp"

using namespace gradtent;

TEST(Benchmark, SuiteExpressionsParse) {
  std::set<std::string> names;
  for (const auto& ex : paper_suite()) {
    EXPECT_TRUE(names.insert(ex.name).second) << ex.name;
    const Polynomial f = ex.polynomial();
    EXPECT_EQ(f.num_vars(), static_cast<int>(ex.variables.size())) << ex.name;
    EXPECT_FALSE(ex.levels.empty());
  }
  EXPECT_TRUE(names.count("motzkin_xy"));
  EXPECT_TRUE(names.count("lax4_h"));
}

TEST(Benchmark, LaxFormsVanishAtIndicatorPoints) {
  const Polynomial h = parse_polynomial(lax4_expression(), {"y2", "y3", "y4", "y5"}).polynomial;
  EXPECT_EQ(h.degree(), 4);
  const std::vector<double> p = {1.0, 1.0, 0.0, 0.0};
  EXPECT_NEAR(h.evaluate(p), 0.0, 1e-12);
  const Polynomial l5 = parse_polynomial(lax5_expression()).polynomial;
  EXPECT_EQ(l5.num_vars(), 5);
  EXPECT_EQ(l5.degree(), 4);
}

TEST(Benchmark, RandomQuarticsAreReproducible) {
  EXPECT_EQ(random_coercive_quartic(3), random_coercive_quartic(3));
  EXPECT_NE(random_coercive_quartic(3), random_coercive_quartic(4));
  EXPECT_EQ(random_coercive_quartic(5).leading_form(),
            Polynomial::variable(2, 0).pow(4) + Polynomial::variable(2, 1).pow(4));
}

TEST(Benchmark, RandomSuiteIsSound) {
  const BenchmarkReport rep = run_random_suite(3, 11, 1, {}, 201);
  EXPECT_EQ(rep.rows.size(), 9u);
  for (const auto& row : rep.rows) {
    EXPECT_TRUE(row.below_oracle()) << row.example << " " << row.result.value << " " << row.oracle;
    EXPECT_TRUE(row.result.finite()) << row.example;
  }
}

TEST(Benchmark, WorkedExampleSubsetAndJson) {
  const BenchmarkReport rep = run_paper_suite({}, false, 1, {"motzkin_xz"});
  ASSERT_FALSE(rep.rows.empty());
  for (const auto& row : rep.rows) {
    EXPECT_TRUE(row.below_oracle());
    if (auto m = row.matches_reference()) EXPECT_TRUE(*m) << row.result.value;
  }
  const nlohmann::json j = to_json(rep, false);
  const BenchmarkReport back = benchmark_report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(to_json(back, false).dump(), j.dump());
  EXPECT_NE(format_table(rep, false).find("motzkin_xz"), std::string::npos);
}

TEST(Benchmark, SlowExamplesAreOptIn) {
  const BenchmarkReport rep = run_paper_suite({}, false, 1, {"nonexistent"});
  EXPECT_TRUE(rep.rows.empty());
}
