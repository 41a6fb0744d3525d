#pragma once

// Relaxation sequences and their ordering checks.
//
// Every relaxation here is "maximize a s.t. f - a = s + (multiplier terms)".
// Setting the multiplier terms to zero recovers the plain SOS program, so
// f^sos is the level -1 start of every family, and within one family the
// values can only grow with the level.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradtent/backend.hpp"
#include "gradtent/error.hpp"
#include "gradtent/parser.hpp"
#include "gradtent/polynomial.hpp"
#include "gradtent/sdp.hpp"
#include "gradtent/sos_program.hpp"
#include "gradtent/tentacle.hpp"

namespace gradtent {

enum class Method { sos, principal, higher, ball, gradvar };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::sos: return "sos";
    case Method::principal: return "principal";
    case Method::higher: return "higher";
    case Method::ball: return "ball";
    case Method::gradvar: return "gradvar";
  }
  return "unknown";
}

inline Method method_from_string(const std::string& s) {
  for (auto m : {Method::sos, Method::principal, Method::higher, Method::ball, Method::gradvar})
    if (to_string(m) == s) return m;
  throw Error("unknown method '" + s + "'");
}

/// Which family a relaxation belongs to.  `radius` applies to principal and
/// ball, `order` to higher.
struct MethodSpec {
  Method method = Method::sos;
  Rational radius = 1;
  int order = 1;

  static MethodSpec sos() { return {Method::sos, 1, 1}; }
  static MethodSpec principal(const Rational& r = 1) { return {Method::principal, r, 1}; }
  static MethodSpec higher(int n) { return {Method::higher, 1, n}; }
  static MethodSpec ball(const Rational& r) { return {Method::ball, r, 1}; }
  static MethodSpec gradvar() { return {Method::gradvar, 1, 1}; }

  /// "principal{R=1}", "higher{N=2}", "sos", ...
  std::string label() const {
    switch (method) {
      case Method::principal: return "principal{R=" + radius.get_str() + "}";
      case Method::higher: return "higher{N=" + std::to_string(order) + "}";
      case Method::ball: return "ball{R=" + radius.get_str() + "}";
      default: return to_string(method);
    }
  }

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// The set the relaxation works over (whole space for sos).
inline TentacleSpec tentacle_spec(const Polynomial& f, const MethodSpec& spec) {
  switch (spec.method) {
    case Method::principal: return TentacleSpec::principal(f, spec.radius);
    case Method::higher: return TentacleSpec::higher(f, spec.order);
    case Method::ball: return TentacleSpec::ball(f, spec.radius);
    case Method::gradvar: return TentacleSpec::gradient_variety(f);
    default: return TentacleSpec::none(f);
  }
}

/// Solver choice shared by every level of a run.
struct RunSettings {
  SolverSettings solver;
  std::string backend = "builtin";
};

/// The program and SDP of one relaxation level.
struct Relaxation {
  MethodSpec spec;
  int level = -1;
  SosProgram program;
  AssembledSdp sdp;
};

/// `level` is k (deg t <= 2k) for the inequality methods, the multiplier
/// degree d for gradvar, and -1 for sos.
inline Relaxation build_relaxation(const Polynomial& f, const MethodSpec& spec, int level) {
  Relaxation r;
  r.spec = spec;
  r.level = level;
  switch (spec.method) {
    case Method::sos:
      r.level = -1;
      r.program = build_sos_program(f, std::nullopt, -1);
      break;
    case Method::principal:
      if (level < 0) throw Error("principal relaxation level must be >= 0");
      r.program = build_sos_program(f, principal_constraint(f, spec.radius), level);
      break;
    case Method::higher:
      if (level < 0) throw Error("higher relaxation level must be >= 0");
      r.program = build_sos_program(f, higher_constraint(f, spec.order), level);
      break;
    case Method::ball:
      if (level < 0) throw Error("ball relaxation level must be >= 0");
      r.program = build_sos_program(f, ball_constraint(f.num_vars(), spec.radius), level);
      break;
    case Method::gradvar:
      if (level < 0) throw Error("gradient-variety multiplier degree must be >= 0");
      r.program = build_gradvar_program(f, level);
      break;
  }
  r.sdp = assemble_sdp(r.program);
  return r;
}

struct RelaxationResult {
  MethodSpec spec;
  int level = -1;
  double value = std::numeric_limits<double>::quiet_NaN();  // -inf infeasible, +inf unbounded
  SdpSolution solution;
  double wall_time = 0.0;
  std::string error;  // set when the level could not be solved at all (budget, backend failure)
  bool over_budget = false;

  bool finite() const { return std::isfinite(value); }
};

inline double value_from_status(const SdpSolution& sol, const AssembledSdp& sdp) {
  switch (sol.status) {
    case SolveStatus::optimal: return sdp.objective_scale.get_d() * sol.free_scalar();
    case SolveStatus::infeasible: return -std::numeric_limits<double>::infinity();
    case SolveStatus::unbounded: return std::numeric_limits<double>::infinity();
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

inline RelaxationResult solve_relaxation(const Relaxation& relax, const RunSettings& run = {}) {
  RelaxationResult res;
  res.spec = relax.spec;
  res.level = relax.level;
  const auto t0 = std::chrono::steady_clock::now();
  res.solution = solve_with_backend(relax.sdp.problem, run.backend, run.solver);
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.value = value_from_status(res.solution, relax.sdp);
  return res;
}

inline RelaxationResult compute_relaxation(const Polynomial& f, const MethodSpec& spec, int level,
                                           const RunSettings& run = {}) {
  return solve_relaxation(build_relaxation(f, spec, level), run);
}

inline RelaxationResult compute_fsos(const Polynomial& f, const RunSettings& run = {}) {
  return compute_relaxation(f, MethodSpec::sos(), -1, run);
}

inline RelaxationResult compute_principal(const Polynomial& f, int k, const Rational& radius = 1,
                                          const RunSettings& run = {}) {
  return compute_relaxation(f, MethodSpec::principal(radius), k, run);
}

inline RelaxationResult compute_higher(const Polynomial& f, int order, int k, const RunSettings& run = {}) {
  return compute_relaxation(f, MethodSpec::higher(order), k, run);
}

inline RelaxationResult compute_ball(const Polynomial& f, const Rational& radius, int k, const RunSettings& run = {}) {
  return compute_relaxation(f, MethodSpec::ball(radius), k, run);
}

inline RelaxationResult compute_gradvar(const Polynomial& f, int d, const RunSettings& run = {}) {
  return compute_relaxation(f, MethodSpec::gradvar(), d, run);
}

inline double chain_tolerance(double v) { return 1e-6 * (1.0 + std::abs(v)); }

struct ChainViolation {
  std::size_t earlier = 0;  // indices into HierarchyReport::results
  std::size_t later = 0;
  double magnitude = 0.0;  // earlier value - later value
};

struct HierarchyReport {
  Polynomial f;
  std::vector<std::string> variables;
  std::vector<RelaxationResult> results;
  std::vector<ChainViolation> chain_violations;
  std::vector<std::string> notes;
};

namespace detail {

inline bool result_order(const RelaxationResult& a, const RelaxationResult& b) {
  if (a.spec.method != b.spec.method) return static_cast<int>(a.spec.method) < static_cast<int>(b.spec.method);
  if (a.spec.radius != b.spec.radius) return a.spec.radius < b.spec.radius;
  if (a.spec.order != b.spec.order) return a.spec.order < b.spec.order;
  return a.level < b.level;
}

inline std::string fmt_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(8) << v;
  return os.str();
}

}  // namespace detail

/// Chain check and stagnation notes over the finite values.  The sos result
/// (if present) precedes every family.
inline void analyze_chains(HierarchyReport& report) {
  report.chain_violations.clear();
  report.notes.clear();
  std::optional<std::size_t> sos_index;
  std::map<std::string, std::vector<std::size_t>> families;
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    const auto& r = report.results[i];
    if (r.spec.method == Method::sos) sos_index = i;
    else families[r.spec.label()].push_back(i);
  }
  if (families.empty() && sos_index) families["sos"] = {};
  for (auto& [label, members] : families) {
    std::vector<std::size_t> chain;
    if (sos_index) chain.push_back(*sos_index);
    chain.insert(chain.end(), members.begin(), members.end());
    for (std::size_t a = 0; a < chain.size(); ++a) {
      const double va = report.results[chain[a]].value;
      if (std::isnan(va)) continue;
      for (std::size_t b = a + 1; b < chain.size(); ++b) {
        const double vb = report.results[chain[b]].value;
        if (std::isnan(vb) || std::isinf(va) || std::isinf(vb)) {
          if (va == std::numeric_limits<double>::infinity() && vb < va)
            report.chain_violations.push_back({chain[a], chain[b], std::numeric_limits<double>::infinity()});
          continue;
        }
        if (va - vb > chain_tolerance(va)) report.chain_violations.push_back({chain[a], chain[b], va - vb});
      }
    }
    int quiet = 0;
    for (std::size_t a = 1; a < members.size(); ++a) {
      const auto& prev = report.results[members[a - 1]];
      const auto& cur = report.results[members[a]];
      if (prev.finite() && cur.finite() && std::abs(cur.value - prev.value) < 1e-6) {
        if (++quiet == 2)
          report.notes.push_back(label + ": values stagnate from level " +
                                 std::to_string(report.results[members[a - 2]].level) + " on (|change| < 1e-6 twice)");
      } else {
        quiet = 0;
      }
    }
  }
  for (const auto& r : report.results) {
    if (r.value == std::numeric_limits<double>::infinity())
      report.notes.push_back(r.spec.label() + " level " + std::to_string(r.level) + ": SDP reported unbounded");
    if (r.spec.method == Method::gradvar && r.finite())
      report.notes.push_back("gradvar level " + std::to_string(r.level) +
                             ": bounds inf f on the real gradient variety, a valid bound for inf f only if the minimum is attained");
  }
}

/// Solves every requested level; a level that throws is recorded with its
/// error message and a NaN value and the remaining levels still run.
inline HierarchyReport run_hierarchy(const Polynomial& f, const std::vector<std::pair<MethodSpec, int>>& levels,
                                     const RunSettings& run = {}, std::vector<std::string> variables = {}) {
  if (levels.empty()) throw Error("run_hierarchy needs at least one level");
  HierarchyReport report;
  report.f = f;
  report.variables = variables.empty() ? default_variable_names(f.num_vars()) : std::move(variables);
  for (const auto& [spec, level] : levels) {
    try {
      report.results.push_back(compute_relaxation(f, spec, level, run));
    } catch (const Error& e) {
      RelaxationResult r;
      r.over_budget = dynamic_cast<const BudgetError*>(&e) != nullptr;
      r.spec = spec;
      r.level = spec.method == Method::sos ? -1 : level;
      r.error = e.what();
      r.solution.message = e.what();
      report.results.push_back(std::move(r));
    }
  }
  std::stable_sort(report.results.begin(), report.results.end(), detail::result_order);
  analyze_chains(report);
  return report;
}

/// f^sos followed by levels 0..k_max of one family.
inline HierarchyReport run_family(const Polynomial& f, const MethodSpec& spec, int k_max, const RunSettings& run = {},
                                  bool include_sos = true, std::vector<std::string> variables = {}) {
  std::vector<std::pair<MethodSpec, int>> levels;
  if (include_sos && spec.method != Method::sos) levels.emplace_back(MethodSpec::sos(), -1);
  if (spec.method == Method::sos) levels.emplace_back(spec, -1);
  else
    for (int k = 0; k <= k_max; ++k) levels.emplace_back(spec, k);
  return run_hierarchy(f, levels, run, std::move(variables));
}

struct LevelInequalityReport {
  int order = 1;       // N
  int level = 0;       // k
  int half_degree = 0; // d = ceil(deg f / 2)
  RelaxationResult lhs;  // f*_{N+1,k}
  RelaxationResult rhs;  // f*_{N,k+d}
  bool decided = false;
  bool holds = false;
  double margin = 0.0;  // rhs - lhs
};

/// Checks f*_{N+1,k} <= f*_{N,k+d} + tol with d = ceil(deg f / 2).
inline LevelInequalityReport check_level_inequality(const Polynomial& f, int order, int k, const RunSettings& run = {},
                                                    std::optional<double> tol = std::nullopt) {
  if (order < 1) throw Error("level inequality needs N >= 1");
  if (k < 0) throw Error("level inequality needs k >= 0");
  LevelInequalityReport rep;
  rep.order = order;
  rep.level = k;
  rep.half_degree = (std::max(f.degree(), 0) + 1) / 2;
  rep.lhs = compute_higher(f, order + 1, k, run);
  rep.rhs = compute_higher(f, order, k + rep.half_degree, run);
  const double l = rep.lhs.value, r = rep.rhs.value;
  if (std::isnan(l) || std::isnan(r)) return rep;
  rep.decided = true;
  if (l == -std::numeric_limits<double>::infinity() || r == std::numeric_limits<double>::infinity()) {
    rep.holds = true;
    rep.margin = std::numeric_limits<double>::infinity();
    return rep;
  }
  rep.margin = r - l;
  rep.holds = rep.margin >= -tol.value_or(chain_tolerance(r));
  return rep;
}

// ---------------------------------------------------------------------------
// Output

inline std::string status_label(const RelaxationResult& r) {
  if (r.error.empty()) return to_string(r.solution.status);
  return r.over_budget ? "budget_exceeded" : "error";
}

inline nlohmann::json value_to_json(double v) {
  if (std::isfinite(v)) return v;
  return detail::fmt_value(v);
}

inline double value_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "+inf" || s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw Error("bad value '" + s + "'");
}

inline nlohmann::json to_json(const RelaxationResult& r, bool include_timing = true) {
  nlohmann::json j = {{"method", to_string(r.spec.method)},
                      {"radius", r.spec.radius.get_str()},
                      {"order", r.spec.order},
                      {"level", r.level},
                      {"status", status_label(r)},
                      {"value", value_to_json(r.value)},
                      {"objective_primal", r.solution.objective_primal},
                      {"objective_dual", r.solution.objective_dual},
                      {"gap", r.solution.gap},
                      {"primal_infeasibility", r.solution.primal_infeasibility},
                      {"dual_infeasibility", r.solution.dual_infeasibility},
                      {"iterations", r.solution.iterations},
                      {"message", r.solution.message}};
  if (!r.error.empty()) j["error"] = r.error;
  if (include_timing) j["wall_time"] = r.wall_time;
  return j;
}

inline RelaxationResult relaxation_result_from_json(const nlohmann::json& j) {
  RelaxationResult r;
  r.spec.method = method_from_string(j.at("method").get<std::string>());
  r.spec.radius = Rational(j.at("radius").get<std::string>());
  r.spec.radius.canonicalize();
  r.spec.order = j.at("order").get<int>();
  r.level = j.at("level").get<int>();
  const auto status = j.at("status").get<std::string>();
  if (status == "error" || status == "budget_exceeded") {
    r.error = j.value("error", std::string("error"));
    r.over_budget = status == "budget_exceeded";
  }
  else r.solution.status = solve_status_from_string(status);
  r.value = value_from_json(j.at("value"));
  r.solution.objective_primal = j.value("objective_primal", 0.0);
  r.solution.objective_dual = j.value("objective_dual", 0.0);
  r.solution.gap = j.value("gap", 0.0);
  r.solution.primal_infeasibility = j.value("primal_infeasibility", 0.0);
  r.solution.dual_infeasibility = j.value("dual_infeasibility", 0.0);
  r.solution.iterations = j.value("iterations", 0);
  r.solution.message = j.value("message", std::string());
  r.wall_time = j.value("wall_time", 0.0);
  return r;
}

inline nlohmann::json to_json(const HierarchyReport& rep, bool include_timing = true) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& r : rep.results) results.push_back(to_json(r, include_timing));
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : rep.chain_violations)
    violations.push_back({{"earlier", v.earlier}, {"later", v.later}, {"magnitude", value_to_json(v.magnitude)}});
  return {{"format", "gradtent-hierarchy"},
          {"version", 1},
          {"polynomial", rep.f.to_string(rep.variables)},
          {"variables", rep.variables},
          {"results", results},
          {"chain_violations", violations},
          {"notes", rep.notes}};
}

inline std::string format_table(const HierarchyReport& rep, bool include_timing = true) {
  std::ostringstream os;
  os << "f = " << rep.f.to_string(rep.variables) << "\n\n";
  os << std::left << std::setw(20) << "method" << std::right << std::setw(6) << "level" << "  " << std::left
     << std::setw(16) << "status" << std::right << std::setw(16) << "value" << std::setw(12) << "gap" << std::setw(7)
     << "iters";
  if (include_timing) os << std::setw(10) << "time[s]";
  os << "\n";
  for (const auto& r : rep.results) {
    std::ostringstream gap, t;
    gap << std::scientific << std::setprecision(2) << r.solution.gap;
    t << std::fixed << std::setprecision(2) << r.wall_time;
    os << std::left << std::setw(20) << r.spec.label() << std::right << std::setw(6) << r.level << "  " << std::left
       << std::setw(16) << status_label(r) << std::right << std::setw(16)
       << detail::fmt_value(r.value) << std::setw(12) << gap.str() << std::setw(7) << r.solution.iterations;
    if (include_timing) os << std::setw(10) << t.str();
    os << "\n";
    if (!r.error.empty()) os << "    " << r.error << "\n";
  }
  for (const auto& v : rep.chain_violations) {
    const auto& a = rep.results[v.earlier];
    const auto& b = rep.results[v.later];
    os << "warning: chain violation: " << b.spec.label() << " level " << b.level << " undercuts " << a.spec.label()
       << " level " << a.level << " by " << detail::fmt_value(v.magnitude) << "\n";
  }
  for (const auto& n : rep.notes) os << "note: " << n << "\n";
  return os.str();
}

inline HierarchyReport hierarchy_report_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "gradtent-hierarchy") throw Error("not a gradtent-hierarchy document");
  HierarchyReport rep;
  rep.variables = j.at("variables").get<std::vector<std::string>>();
  rep.f = parse_polynomial(j.at("polynomial").get<std::string>(), rep.variables).polynomial;
  for (const auto& r : j.at("results")) rep.results.push_back(relaxation_result_from_json(r));
  for (const auto& v : j.at("chain_violations"))
    rep.chain_violations.push_back(
        {v.at("earlier").get<std::size_t>(), v.at("later").get<std::size_t>(), value_from_json(v.at("magnitude"))});
  rep.notes = j.at("notes").get<std::vector<std::string>>();
  return rep;
}

}  // namespace gradtent
