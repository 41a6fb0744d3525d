#pragma once

// Standard-form block SDP with free variables:
//
//   maximize   c^T u
//   subject to sum_j <A_ij, X_j> + sum_l B_il u_l = b_i    (i = 1..m)
//              X_j positive semidefinite, u free.
//
// Its dual is  minimize b^T y  s.t.  Z_j = sum_i y_i A_ij  PSD,  B^T y = c.
//
// Constraint matrices are stored as upper-triangular triplets; an entry
// (r, c, v) with r < c stands for both A[r][c] = A[c][r] = v.

#include <Eigen/Dense>
#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "gradtent/error.hpp"
#include "gradtent/polynomial.hpp"

namespace gradtent {

struct SdpEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const SdpEntry&, const SdpEntry&) = default;
};

struct SdpConstraint {
  std::vector<SdpEntry> entries;
  std::vector<std::pair<int, double>> free_terms;  // (free variable index, coefficient)
  Rational rhs = 0;

  friend bool operator==(const SdpConstraint&, const SdpConstraint&) = default;
};

struct SdpProblem {
  std::vector<int> block_dims;
  int num_free = 0;
  std::vector<double> objective;  // one weight per free variable
  std::vector<SdpConstraint> constraints;

  int num_constraints() const noexcept { return static_cast<int>(constraints.size()); }

  friend bool operator==(const SdpProblem&, const SdpProblem&) = default;
};

inline void validate(const SdpProblem& p) {
  if (static_cast<int>(p.objective.size()) != p.num_free) throw Error("objective length differs from free variable count");
  for (int d : p.block_dims)
    if (d < 1) throw Error("PSD block dimensions must be positive");
  for (const auto& con : p.constraints) {
    for (const auto& e : con.entries) {
      if (e.block < 0 || e.block >= static_cast<int>(p.block_dims.size())) throw Error("constraint entry names a missing block");
      const int dim = p.block_dims[static_cast<std::size_t>(e.block)];
      if (e.row < 0 || e.col < e.row || e.col >= dim) throw Error("constraint entry outside the upper triangle of its block");
    }
    for (const auto& [idx, v] : con.free_terms)
      if (idx < 0 || idx >= p.num_free) throw Error("constraint references a missing free variable");
  }
}

enum class SolveStatus { optimal, infeasible, unbounded, max_iterations, numerical_error };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

inline SolveStatus solve_status_from_string(const std::string& s) {
  for (auto st : {SolveStatus::optimal, SolveStatus::infeasible, SolveStatus::unbounded, SolveStatus::max_iterations,
                  SolveStatus::numerical_error})
    if (to_string(st) == s) return st;
  throw Error("unknown solve status '" + s + "'");
}

struct SolverSettings {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iter = 200;
  double infeasibility_threshold = 1e10;
  int max_block_dim = 400;
  int max_constraints = 5000;
  int stall_window = 40;                          // iterations allowed without halving max(gap, pinf, dinf)
  int extended_precision_max_constraints = 1500;  // long double retry only below this size
  bool verbose = false;
};

/// One row of the iteration log.  `coupling` bounds how far an infeasible
/// iterate may violate weak duality: dobj - pobj = <X,Z> + <X,Rd> + rp.y - rf.u.
struct IterationRecord {
  int iter = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double complementarity = 0.0;
  double coupling = 0.0;
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::numerical_error;
  std::vector<Eigen::MatrixXd> primal_blocks;
  std::vector<Eigen::MatrixXd> dual_blocks;
  Eigen::VectorXd free_vector;
  Eigen::VectorXd dual_vector;
  double objective_primal = 0.0;
  double objective_dual = 0.0;
  double gap = 0.0;  // relative duality gap at the returned iterate
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> history;
  std::string message;

  /// The first free variable: the bound `a` in every relaxation built here.
  double free_scalar() const { return free_vector.size() > 0 ? free_vector[0] : 0.0; }
};

// ---------------------------------------------------------------------------
// JSON layout
//
// {
//   "format": "gradtent-sdp", "version": 1,
//   "blocks": [28, 1], "free": 1, "objective": [1.0],
//   "constraints": [
//     {"rhs": "1/2", "entries": [[block, row, col, value], ...], "free": [[index, value], ...]},
//     ...
//   ]
// }

inline nlohmann::json to_json(const SdpProblem& p) {
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& con : p.constraints) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : con.entries) entries.push_back({e.block, e.row, e.col, e.value});
    nlohmann::json free = nlohmann::json::array();
    for (const auto& [idx, v] : con.free_terms) free.push_back({idx, v});
    cons.push_back({{"rhs", con.rhs.get_str()}, {"entries", entries}, {"free", free}});
  }
  return {{"format", "gradtent-sdp"}, {"version", 1},        {"blocks", p.block_dims},
          {"free", p.num_free},       {"objective", p.objective}, {"constraints", cons}};
}

inline SdpProblem sdp_problem_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "gradtent-sdp") throw Error("not a gradtent-sdp document");
  SdpProblem p;
  p.block_dims = j.at("blocks").get<std::vector<int>>();
  p.num_free = j.at("free").get<int>();
  p.objective = j.at("objective").get<std::vector<double>>();
  for (const auto& jc : j.at("constraints")) {
    SdpConstraint con;
    con.rhs = Rational(jc.at("rhs").get<std::string>());
    con.rhs.canonicalize();
    for (const auto& e : jc.at("entries"))
      con.entries.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>(), e.at(3).get<double>()});
    for (const auto& fr : jc.at("free")) con.free_terms.emplace_back(fr.at(0).get<int>(), fr.at(1).get<double>());
    p.constraints.push_back(std::move(con));
  }
  validate(p);
  return p;
}

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace detail

/// Solution layout used by external backends (and written by `gradtent sdp-solve`).
inline nlohmann::json to_json(const SdpSolution& s) {
  nlohmann::json primal = nlohmann::json::array();
  for (const auto& b : s.primal_blocks) primal.push_back(detail::matrix_to_json(b));
  nlohmann::json dual = nlohmann::json::array();
  for (const auto& b : s.dual_blocks) dual.push_back(detail::matrix_to_json(b));
  return {{"format", "gradtent-sdp-solution"},
          {"status", to_string(s.status)},
          {"primal_blocks", primal},
          {"dual_blocks", dual},
          {"free_vector", detail::vector_to_json(s.free_vector)},
          {"dual_vector", detail::vector_to_json(s.dual_vector)},
          {"objective_primal", s.objective_primal},
          {"objective_dual", s.objective_dual},
          {"gap", s.gap},
          {"primal_infeasibility", s.primal_infeasibility},
          {"dual_infeasibility", s.dual_infeasibility},
          {"iterations", s.iterations},
          {"message", s.message}};
}

inline SdpSolution sdp_solution_from_json(const nlohmann::json& j) {
  SdpSolution s;
  s.status = solve_status_from_string(j.at("status").get<std::string>());
  for (const auto& b : j.at("primal_blocks")) s.primal_blocks.push_back(detail::matrix_from_json(b));
  if (j.contains("dual_blocks"))
    for (const auto& b : j.at("dual_blocks")) s.dual_blocks.push_back(detail::matrix_from_json(b));
  s.free_vector = detail::vector_from_json(j.at("free_vector"));
  s.dual_vector = detail::vector_from_json(j.value("dual_vector", nlohmann::json::array()));
  s.objective_primal = j.value("objective_primal", 0.0);
  s.objective_dual = j.value("objective_dual", 0.0);
  s.gap = j.value("gap", 0.0);
  s.primal_infeasibility = j.value("primal_infeasibility", 0.0);
  s.dual_infeasibility = j.value("dual_infeasibility", 0.0);
  s.iterations = j.value("iterations", 0);
  s.message = j.value("message", std::string());
  return s;
}

}  // namespace gradtent
