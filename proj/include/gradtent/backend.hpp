#pragma once

// Solver backends selectable by name:
//
//   "builtin"          the interior-point solver of sdp_solver.hpp
//   "split"            same solver on a reformulation where every free
//                      variable u_l is written as u_l+ - u_l- with 1x1 PSD
//                      blocks; only the objective value stays free
//   "external:<cmd>"   runs `<cmd> problem.json solution.json` and reads the
//                      solution back (layouts in sdp.hpp)

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "gradtent/error.hpp"
#include "gradtent/sdp.hpp"
#include "gradtent/sdp_solver.hpp"

namespace gradtent {

namespace detail {

/// Free variables become differences of nonnegative scalars; a single free
/// variable w = c^T u is kept so that the objective stays "maximize w".
inline SdpProblem split_free_variables(const SdpProblem& p) {
  SdpProblem q;
  q.block_dims = p.block_dims;
  const int base = static_cast<int>(p.block_dims.size());
  for (int l = 0; l < 2 * p.num_free; ++l) q.block_dims.push_back(1);
  q.num_free = 1;
  q.objective = {1.0};
  for (const auto& con : p.constraints) {
    SdpConstraint c;
    c.entries = con.entries;
    c.rhs = con.rhs;
    for (const auto& [l, v] : con.free_terms) {
      c.entries.push_back({base + 2 * l, 0, 0, v});
      c.entries.push_back({base + 2 * l + 1, 0, 0, -v});
    }
    q.constraints.push_back(std::move(c));
  }
  SdpConstraint link;
  link.free_terms.emplace_back(0, 1.0);
  for (int l = 0; l < p.num_free; ++l) {
    const double cl = p.objective[static_cast<std::size_t>(l)];
    if (cl == 0.0) continue;
    link.entries.push_back({base + 2 * l, 0, 0, -cl});
    link.entries.push_back({base + 2 * l + 1, 0, 0, cl});
  }
  q.constraints.push_back(std::move(link));
  return q;
}

inline SdpSolution solve_split(const SdpProblem& p, const SolverSettings& settings) {
  SdpSolution s = solve(split_free_variables(p), settings);
  const std::size_t nb = p.block_dims.size();
  SdpSolution out;
  out.status = s.status;
  out.primal_blocks.assign(s.primal_blocks.begin(), s.primal_blocks.begin() + static_cast<std::ptrdiff_t>(nb));
  if (s.dual_blocks.size() >= nb)
    out.dual_blocks.assign(s.dual_blocks.begin(), s.dual_blocks.begin() + static_cast<std::ptrdiff_t>(nb));
  out.free_vector = Eigen::VectorXd::Zero(p.num_free);
  for (int l = 0; l < p.num_free; ++l)
    out.free_vector[l] = s.primal_blocks[nb + 2 * static_cast<std::size_t>(l)](0, 0) -
                         s.primal_blocks[nb + 2 * static_cast<std::size_t>(l) + 1](0, 0);
  out.dual_vector = s.dual_vector.head(p.num_constraints());
  out.objective_primal = s.objective_primal;
  out.objective_dual = s.objective_dual;
  out.gap = s.gap;
  out.primal_infeasibility = s.primal_infeasibility;
  out.dual_infeasibility = s.dual_infeasibility;
  out.iterations = s.iterations;
  out.history = std::move(s.history);
  out.message = s.message.empty() ? "split free variables" : s.message + " (split free variables)";
  return out;
}

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

inline SdpSolution solve_external(const SdpProblem& p, const std::string& command, const SolverSettings& settings) {
  if (command.empty()) throw Error("external backend needs a command");
  static std::atomic<unsigned> counter{0};
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path();
  const std::string stem = "gradtent-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
  const fs::path in = dir / (stem + "-problem.json");
  const fs::path out = dir / (stem + "-solution.json");
  {
    nlohmann::json doc = to_json(p);
    doc["settings"] = {{"tol_gap", settings.tol_gap}, {"tol_feas", settings.tol_feas}, {"max_iter", settings.max_iter}};
    std::ofstream os(in);
    os << doc.dump();
  }
  const std::string cmd = command + " " + shell_quote(in.string()) + " " + shell_quote(out.string());
  const int rc = std::system(cmd.c_str());
  std::error_code ec;
  fs::remove(in, ec);
  if (rc != 0) {
    fs::remove(out, ec);
    throw Error("external solver '" + command + "' exited with status " + std::to_string(rc));
  }
  std::ifstream is(out);
  if (!is) throw Error("external solver '" + command + "' wrote no solution");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    fs::remove(out, ec);
    throw Error(std::string("external solver output is not JSON: ") + e.what());
  }
  fs::remove(out, ec);
  SdpSolution s = sdp_solution_from_json(doc);
  if (static_cast<int>(s.free_vector.size()) != p.num_free || s.primal_blocks.size() != p.block_dims.size())
    throw Error("external solver returned a solution of the wrong shape");
  return s;
}

}  // namespace detail

inline std::vector<std::string> builtin_backends() { return {"builtin", "split"}; }

inline SdpSolution solve_with_backend(const SdpProblem& problem, const std::string& backend,
                                      const SolverSettings& settings = {}) {
  if (backend.empty() || backend == "builtin") return solve(problem, settings);
  if (backend == "split") return detail::solve_split(problem, settings);
  const std::string prefix = "external:";
  if (backend.rfind(prefix, 0) == 0) return detail::solve_external(problem, backend.substr(prefix.size()), settings);
  throw Error("unknown solver backend '" + backend + "'");
}

}  // namespace gradtent
