#pragma once

// Benchmark suites: the catalogue of worked examples with their recorded
// reference values, and seeded random coercive quartics.  Both compare every
// relaxation value against a brute-force oracle minimum.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradtent/hierarchy.hpp"
#include "gradtent/oracle.hpp"
#include "gradtent/parser.hpp"
#include "gradtent/tentacle.hpp"

namespace gradtent {

struct BenchmarkLevel {
  MethodSpec spec;
  int level = -1;
  std::optional<double> reference;  // recorded value, if any
  bool reference_infeasible = false;
  double tolerance = 0.0;  // informational
};

enum class OracleKind { grid, multistart };

struct BenchmarkExample {
  std::string name;
  std::string expression;
  std::vector<std::string> variables;
  std::vector<BenchmarkLevel> levels;
  OracleKind oracle = OracleKind::grid;
  double box_half_width = 5.0;
  int resolution = 401;  // grid points per axis, or starts for multistart
  bool slow = false;
  std::string note;

  Polynomial polynomial() const { return parse_polynomial(expression, variables).polynomial; }
};

namespace detail {

inline BenchmarkLevel ref_level(MethodSpec spec, int level, double value, double tol) {
  return {std::move(spec), level, value, false, tol};
}
inline BenchmarkLevel infeasible_level() { return {MethodSpec::sos(), -1, std::nullopt, true, 0.0}; }
inline BenchmarkLevel plain_level(MethodSpec spec, int level) { return {std::move(spec), level, std::nullopt, false, 0.0}; }

}  // namespace detail

inline std::string lax5_expression() {
  std::string s;
  for (int i = 1; i <= 5; ++i) {
    if (i > 1) s += " + ";
    std::string term;
    for (int j = 1; j <= 5; ++j) {
      if (j == i) continue;
      if (!term.empty()) term += "*";
      term += "(x" + std::to_string(i) + "-x" + std::to_string(j) + ")";
    }
    s += term;
  }
  return s;
}

inline std::string lax4_expression() {
  return "y2*y3*y4*y5 - y2*(y3-y2)*(y4-y2)*(y5-y2) - y3*(y2-y3)*(y4-y3)*(y5-y3)"
         " - y4*(y2-y4)*(y3-y4)*(y5-y4) - y5*(y2-y5)*(y3-y5)*(y4-y5)";
}

/// The worked examples.  Per-example parameters: the two-variable quartic
/// uses the auto-scaled radius, the non-attained example a wide oracle box,
/// and the Lax forms a multistart oracle (their grids would be too large).
inline std::vector<BenchmarkExample> paper_suite() {
  using detail::infeasible_level;
  using detail::plain_level;
  using detail::ref_level;
  const MethodSpec p1 = MethodSpec::principal();
  std::vector<BenchmarkExample> suite;

  suite.push_back({"motzkin_xy", "x^4*y^2 + x^2*y^4 - 3*x^2*y^2 + 1", {"x", "y"},
                   {infeasible_level(), ref_level(p1, 0, -0.0017, 5e-3), ref_level(p1, 1, -0.0013, 5e-3),
                    ref_level(p1, 2, 0.000066, 5e-3)},
                   OracleKind::grid, 2.0, 401, false, ""});
  suite.push_back({"motzkin_xz", "x^4 + x^2 + z^6 - 3*x^2*z^2", {"x", "z"},
                   {ref_level(MethodSpec::sos(), -1, -0.1780, 2e-2), ref_level(p1, 0, -5.1749e-5, 1e-4),
                    ref_level(p1, 1, -1.2520e-7, 1e-4), ref_level(p1, 2, 8.7662e-10, 1e-4)},
                   OracleKind::grid, 2.0, 401, false, ""});
  suite.push_back({"berg", "x^2*y^2*(x^2 + y^2 - 1)", {"x", "y"},
                   {infeasible_level(), ref_level(p1, 0, -0.0564, 2e-3), ref_level(p1, 1, -0.0555, 2e-3),
                    ref_level(p1, 2, -0.0371, 2e-3), ref_level(p1, 3, -0.0370, 2e-3)},
                   OracleKind::grid, 1.5, 301, false, ""});

  {
    BenchmarkExample q{"quartic", "(x^2 + 1)^2 + (y^2 + 1)^2 - 2*(x + y + 1)^2", {"x", "y"}, {}, OracleKind::grid,
                       5.0, 401, false, ""};
    const MethodSpec pr = MethodSpec::principal(auto_scale_radius(q.polynomial()));
    q.levels = {ref_level(MethodSpec::sos(), -1, -11.4581, 2e-2), ref_level(pr, 0, -11.4581, 2e-2),
                ref_level(pr, 1, -11.4581, 2e-2), ref_level(pr, 2, -11.4581, 2e-2)};
    q.note = "radius " + pr.radius.get_str() + " (auto-scaled)";
    suite.push_back(std::move(q));
  }

  suite.push_back({"lax5", lax5_expression(), {"x1", "x2", "x3", "x4", "x5"},
                   {infeasible_level(), ref_level(p1, 0, -0.2367, 5e-3), ref_level(p1, 1, -0.0999, 5e-3),
                    ref_level(p1, 2, -0.0224, 5e-3)},
                   OracleKind::multistart, 1.0, 50, true, "level 2 exceeds the size limits"});
  suite.push_back({"lax4_h", lax4_expression(), {"y2", "y3", "y4", "y5"},
                   {infeasible_level(), ref_level(p1, 0, -0.2380, 5e-3), ref_level(p1, 1, -0.0351, 5e-3),
                    ref_level(p1, 2, -0.0072, 5e-3), ref_level(p1, 3, -0.0019, 3e-3),
                    ref_level(p1, 4, -0.00086285, 3e-3)},
                   OracleKind::multistart, 1.0, 50, true, "level 4 exceeds the size limits"});

  suite.push_back({"nonattained", "(1 - x*y)^2 + y^2", {"x", "y"},
                   {ref_level(MethodSpec::sos(), -1, 1.5142e-12, 1e-6), ref_level(p1, 0, 0.0016, 1e-1),
                    ref_level(p1, 1, 0.0727, 1e-1), ref_level(p1, 2, 0.1317, 1e-1),
                    plain_level(MethodSpec::gradvar(), 2)},
                   OracleKind::grid, 50.0, 2001, false, "infimum 0 is not attained"});
  return suite;
}

/// x^4 + y^4 plus seeded terms of degree <= 3 with coefficients in
/// {-1, -0.99, ..., 1}; the quartic leading form makes it coercive.
inline Polynomial random_coercive_quartic(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  Polynomial f = x.pow(4) + y.pow(4);
  for (int d = 0; d <= 3; ++d)
    for (int i = 0; i <= d; ++i) {
      const auto c = static_cast<long>(rng() % 201) - 100;
      if (c != 0) f += Rational(c, 100) * x.pow(static_cast<unsigned>(i)) * y.pow(static_cast<unsigned>(d - i));
    }
  return f;
}

// ---------------------------------------------------------------------------

struct BenchmarkRow {
  std::string example;
  RelaxationResult result;
  std::optional<double> reference;
  bool reference_infeasible = false;
  double tolerance = 0.0;
  double oracle = std::numeric_limits<double>::quiet_NaN();

  /// Agreement with the recorded value: nullopt if there is none.
  std::optional<bool> matches_reference() const {
    if (reference_infeasible) return result.value == -std::numeric_limits<double>::infinity();
    if (!reference) return std::nullopt;
    return result.finite() && std::abs(result.value - *reference) <= tolerance;
  }
  /// Soundness against the oracle (true for non-finite values).
  bool below_oracle(double tol = 1e-4) const {
    return !result.finite() || std::isnan(oracle) || result.value <= oracle + tol;
  }
};

struct BenchmarkReport {
  std::string suite;
  std::vector<BenchmarkRow> rows;
  std::vector<std::string> notes;
};

inline double oracle_min(const Polynomial& f, OracleKind kind, double half_width, int resolution, std::uint64_t seed) {
  const Box box = Box::cube(f.num_vars(), half_width);
  if (kind == OracleKind::grid) return grid_min(f, box, resolution).min_value;
  return multistart_descent(f, box, resolution, 2000, seed).min_value;
}

inline BenchmarkReport run_paper_suite(const RunSettings& run = {}, bool include_slow = false, std::uint64_t seed = 1,
                                       const std::vector<std::string>& only = {}) {
  BenchmarkReport rep;
  rep.suite = "paper";
  for (const auto& ex : paper_suite()) {
    if (!only.empty() && std::find(only.begin(), only.end(), ex.name) == only.end()) continue;
    if (ex.slow && !include_slow && only.empty()) {
      rep.notes.push_back(ex.name + ": skipped (slow; pass --include-slow)");
      continue;
    }
    const Polynomial f = ex.polynomial();
    std::vector<std::pair<MethodSpec, int>> levels;
    for (const auto& l : ex.levels) levels.emplace_back(l.spec, l.level);
    const HierarchyReport h = run_hierarchy(f, levels, run, ex.variables);
    const double oracle = oracle_min(f, ex.oracle, ex.box_half_width, ex.resolution, seed);
    for (const auto& r : h.results) {
      BenchmarkRow row{ex.name, r, std::nullopt, false, 0.0, oracle};
      for (const auto& l : ex.levels)
        if (l.spec == r.spec && (l.level == r.level || (l.spec.method == Method::sos && r.level == -1))) {
          row.reference = l.reference;
          row.reference_infeasible = l.reference_infeasible;
          row.tolerance = l.tolerance;
        }
      rep.rows.push_back(std::move(row));
    }
    for (const auto& v : h.chain_violations)
      rep.notes.push_back(ex.name + ": chain violation between levels " + std::to_string(h.results[v.earlier].level) +
                          " and " + std::to_string(h.results[v.later].level));
    if (!ex.note.empty()) rep.notes.push_back(ex.name + ": " + ex.note);
  }
  return rep;
}

/// f^sos and principal levels 0..k_max on `count` random quartics.
inline BenchmarkReport run_random_suite(int count = 20, std::uint64_t seed = 1, int k_max = 2,
                                        const RunSettings& run = {}, int resolution = 801) {
  BenchmarkReport rep;
  rep.suite = "random";
  for (int i = 0; i < count; ++i) {
    const Polynomial f = random_coercive_quartic(seed + static_cast<std::uint64_t>(i));
    const HierarchyReport h = run_family(f, MethodSpec::principal(), k_max, run, true, {"x", "y"});
    const double oracle = grid_min(f, Box::cube(2, 4.0), resolution).min_value;
    for (const auto& r : h.results)
      rep.rows.push_back({"random_" + std::to_string(i), r, std::nullopt, false, 0.0, oracle});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json to_json(const BenchmarkReport& rep, bool include_timing = true) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : rep.rows) {
    nlohmann::json j = to_json(row.result, include_timing);
    j["example"] = row.example;
    j["reference"] = row.reference_infeasible ? nlohmann::json("infeasible")
                     : row.reference          ? nlohmann::json(*row.reference)
                                              : nlohmann::json(nullptr);
    j["tolerance"] = row.tolerance;
    j["oracle"] = value_to_json(row.oracle);
    const auto m = row.matches_reference();
    j["matches_reference"] = m ? nlohmann::json(*m) : nlohmann::json(nullptr);
    j["below_oracle"] = row.below_oracle();
    rows.push_back(j);
  }
  return {{"format", "gradtent-benchmark"}, {"version", 1}, {"suite", rep.suite}, {"rows", rows}, {"notes", rep.notes}};
}

inline BenchmarkReport benchmark_report_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "gradtent-benchmark") throw Error("not a gradtent-benchmark document");
  BenchmarkReport rep;
  rep.suite = j.at("suite").get<std::string>();
  for (const auto& r : j.at("rows")) {
    BenchmarkRow row;
    row.example = r.at("example").get<std::string>();
    row.result = relaxation_result_from_json(r);
    const auto& ref = r.at("reference");
    if (ref.is_string()) row.reference_infeasible = true;
    else if (ref.is_number()) row.reference = ref.get<double>();
    row.tolerance = r.at("tolerance").get<double>();
    row.oracle = value_from_json(r.at("oracle"));
    rep.rows.push_back(std::move(row));
  }
  rep.notes = j.at("notes").get<std::vector<std::string>>();
  return rep;
}

inline std::string format_table(const BenchmarkReport& rep, bool include_timing = true) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "example" << std::setw(26) << "method" << std::right << std::setw(6) << "level"
     << "  " << std::left << std::setw(16) << "status" << std::right << std::setw(15) << "value" << std::setw(13)
     << "reference" << std::setw(6) << "ok" << std::setw(13) << "oracle" << std::setw(7) << "sound";
  if (include_timing) os << std::setw(10) << "time[s]";
  os << "\n";
  for (const auto& row : rep.rows) {
    const auto m = row.matches_reference();
    std::string ref = row.reference_infeasible ? "-inf" : row.reference ? detail::fmt_value(*row.reference) : "";
    std::ostringstream t;
    t << std::fixed << std::setprecision(2) << row.result.wall_time;
    os << std::left << std::setw(14) << row.example << std::setw(26) << row.result.spec.label() << std::right
       << std::setw(6) << row.result.level << "  " << std::left << std::setw(16) << status_label(row.result)
       << std::right << std::setw(15) << detail::fmt_value(row.result.value) << std::setw(13) << ref << std::setw(6)
       << (m ? (*m ? "yes" : "no") : "") << std::setw(13) << detail::fmt_value(row.oracle) << std::setw(7)
       << (row.below_oracle() ? "yes" : "NO");
    if (include_timing) os << std::setw(10) << t.str();
    os << "\n";
  }
  for (const auto& n : rep.notes) os << "note: " << n << "\n";
  return os.str();
}

}  // namespace gradtent
