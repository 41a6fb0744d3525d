#pragma once

// Gram-matrix translation of relaxations of the form
//
//   maximize a  s.t.  f - a = sum_j g_j * (v_j^T M_j v_j) + sum_i p_i h_i,   M_j PSD,
//
// into the block SDP of sdp.hpp.  One equality constraint is emitted per
// monomial of degree <= D (the matching degree), in graded order.  The bound
// `a` is free variable 0 and carries coefficient +1 in the constant
// monomial's row; the coefficients of each p_i follow it.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gradtent/error.hpp"
#include "gradtent/polynomial.hpp"
#include "gradtent/sdp.hpp"

namespace gradtent {

struct MonomialBasis {
  int num_vars = 1;
  int max_degree = 0;
  std::vector<Monomial> entries;

  std::size_t size() const noexcept { return entries.size(); }
};

namespace detail {

inline void enumerate_degree(int n, int degree, int var, std::vector<int>& current, std::vector<Monomial>& out) {
  if (var == n - 1) {
    current[static_cast<std::size_t>(var)] = degree;
    out.emplace_back(current);
    current[static_cast<std::size_t>(var)] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[static_cast<std::size_t>(var)] = e;
    enumerate_degree(n, degree - e, var + 1, current, out);
  }
  current[static_cast<std::size_t>(var)] = 0;
}

}  // namespace detail

/// All monomials of degree <= d in n variables, in GrlexLess order.
inline MonomialBasis monomial_basis(int n, int d) {
  if (n < 1) throw DimensionError("monomial basis needs n >= 1");
  if (d < 0) throw Error("monomial basis degree must be nonnegative");
  MonomialBasis basis{n, d, {}};
  std::vector<int> current(static_cast<std::size_t>(n), 0);
  for (int deg = 0; deg <= d; ++deg) detail::enumerate_degree(n, deg, 0, current, basis.entries);
  return basis;
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

/// A sum-of-squares term g * (v^T M v) with v the monomials of `basis`.
struct GramBlock {
  std::string label;
  Polynomial multiplier;
  MonomialBasis basis;
};

/// A free polynomial term p * h with p ranging over span(basis).
struct FreePolyBlock {
  std::string label;
  Polynomial multiplier;
  MonomialBasis basis;
};

struct SosProgram {
  Polynomial f;
  std::vector<GramBlock> gram_blocks;
  std::vector<FreePolyBlock> free_blocks;
  int matching_degree = 0;
};

inline int even_ceiling(int d) { return d <= 0 ? 0 : d + (d % 2); }

/// Relaxation f - a = s + t g with deg t <= 2k.  k = -1 drops t (plain SOS bound).
inline SosProgram build_sos_program(const Polynomial& f, const std::optional<Polynomial>& g, int k) {
  if (k < -1) throw Error("relaxation level must be >= -1");
  const int n = f.num_vars();
  const int deg_f = std::max(f.degree(), 0);
  SosProgram prog{f, {}, {}, 0};
  if (k == -1) {
    prog.matching_degree = even_ceiling(deg_f);
  } else {
    if (!g) throw Error("a level k >= 0 needs a constraint polynomial");
    if (g->num_vars() != n) throw DimensionError("constraint and objective live in different rings");
    const int deg_g = std::max(g->degree(), 0);
    prog.matching_degree = even_ceiling(std::max(deg_f, deg_g + 2 * k));
  }
  prog.gram_blocks.push_back({"s", Polynomial::constant(n, 1), monomial_basis(n, prog.matching_degree / 2)});
  if (k >= 0) prog.gram_blocks.push_back({"t", *g, monomial_basis(n, k)});
  return prog;
}

/// Gradient-variety relaxation f - a = s + sum_i p_i df/dx_i with deg p_i <= d.
inline SosProgram build_gradvar_program(const Polynomial& f, int d) {
  if (d < 0) throw Error("gradient-variety multiplier degree must be nonnegative");
  const int n = f.num_vars();
  const int deg_f = std::max(f.degree(), 0);
  SosProgram prog{f, {}, {}, 0};
  prog.matching_degree = even_ceiling(std::max(deg_f, d + deg_f - 1));
  prog.gram_blocks.push_back({"s", Polynomial::constant(n, 1), monomial_basis(n, prog.matching_degree / 2)});
  const auto grad = gradient(f);
  for (int i = 0; i < n; ++i)
    prog.free_blocks.push_back({"p" + std::to_string(i + 1), grad[static_cast<std::size_t>(i)], monomial_basis(n, d)});
  return prog;
}

/// The SDP together with the scalings used to build it.  The solver sees
/// f / objective_scale and g_j / block_scales[j]; Gram matrices of the
/// original identity are (objective_scale / block_scales[j]) * X_j.
struct AssembledSdp {
  SdpProblem problem;
  std::vector<Monomial> constraint_monomials;
  Rational objective_scale = 1;
  std::vector<Rational> block_scales;
  std::vector<Rational> free_scales;
  std::vector<int> free_offsets;  // first free-variable index of each free block (a is index 0)

  int num_free_coefficients() const { return problem.num_free - 1; }
};

namespace detail {

inline Rational scale_of(const Polynomial& p) {
  const Rational c = p.max_abs_coefficient();
  return c == 0 ? Rational(1) : c;
}

}  // namespace detail

inline AssembledSdp assemble_sdp(const SosProgram& prog) {
  const int n = prog.f.num_vars();
  const int D = prog.matching_degree;
  for (const auto& blk : prog.gram_blocks)
    if (std::max(blk.multiplier.degree(), 0) + 2 * blk.basis.max_degree > D)
      throw Error("Gram block '" + blk.label + "' exceeds the matching degree");
  for (const auto& blk : prog.free_blocks)
    if (std::max(blk.multiplier.degree(), 0) + blk.basis.max_degree > D)
      throw Error("free block '" + blk.label + "' exceeds the matching degree");
  if (prog.f.degree() > D) throw Error("objective degree exceeds the matching degree");

  AssembledSdp out;
  out.constraint_monomials = monomial_basis(n, D).entries;
  std::unordered_map<Monomial, int, MonomialHash> row_of;
  row_of.reserve(out.constraint_monomials.size());
  for (std::size_t i = 0; i < out.constraint_monomials.size(); ++i) row_of.emplace(out.constraint_monomials[i], static_cast<int>(i));

  auto& P = out.problem;
  P.constraints.resize(out.constraint_monomials.size());
  out.objective_scale = detail::scale_of(prog.f);
  for (const auto& [m, c] : prog.f.terms()) {
    Rational r = c / out.objective_scale;
    r.canonicalize();
    P.constraints[static_cast<std::size_t>(row_of.at(m))].rhs = r;
  }

  for (std::size_t j = 0; j < prog.gram_blocks.size(); ++j) {
    const auto& blk = prog.gram_blocks[j];
    const Rational scale = detail::scale_of(blk.multiplier);
    out.block_scales.push_back(scale);
    P.block_dims.push_back(static_cast<int>(blk.basis.size()));
    std::vector<std::pair<Monomial, double>> mult;
    for (const auto& [m, c] : blk.multiplier.terms()) mult.emplace_back(m, Rational(c / scale).get_d());
    const auto& v = blk.basis.entries;
    for (std::size_t r = 0; r < v.size(); ++r)
      for (std::size_t c = r; c < v.size(); ++c) {
        const Monomial rc = v[r] * v[c];
        for (const auto& [m, coef] : mult)
          P.constraints[static_cast<std::size_t>(row_of.at(rc * m))].entries.push_back(
              {static_cast<int>(j), static_cast<int>(r), static_cast<int>(c), coef});
      }
  }

  P.num_free = 1;
  for (std::size_t b = 0; b < prog.free_blocks.size(); ++b) {
    const auto& blk = prog.free_blocks[b];
    const Rational scale = detail::scale_of(blk.multiplier);
    out.free_scales.push_back(scale);
    out.free_offsets.push_back(P.num_free);
    for (std::size_t k = 0; k < blk.basis.size(); ++k) {
      const int var = P.num_free + static_cast<int>(k);
      for (const auto& [m, c] : blk.multiplier.terms())
        P.constraints[static_cast<std::size_t>(row_of.at(blk.basis.entries[k] * m))].free_terms.emplace_back(
            var, Rational(c / scale).get_d());
    }
    P.num_free += static_cast<int>(blk.basis.size());
  }
  P.objective.assign(static_cast<std::size_t>(P.num_free), 0.0);
  P.objective[0] = 1.0;
  P.constraints[static_cast<std::size_t>(row_of.at(Monomial(n)))].free_terms.emplace_back(0, 1.0);
  return out;
}

/// Gram matrices, bound and free coefficients of the original (unscaled) identity.
struct ProgramSolution {
  double bound = 0.0;
  std::vector<Eigen::MatrixXd> gram;
  std::vector<Eigen::VectorXd> free_coefficients;
};

inline ProgramSolution unscale_solution(const AssembledSdp& sdp, const Eigen::VectorXd& free_vector,
                                        const std::vector<Eigen::MatrixXd>& blocks) {
  ProgramSolution out;
  const double fs = sdp.objective_scale.get_d();
  out.bound = fs * free_vector[0];
  for (std::size_t j = 0; j < blocks.size(); ++j) out.gram.push_back(blocks[j] * (fs / sdp.block_scales[j].get_d()));
  for (std::size_t b = 0; b < sdp.free_offsets.size(); ++b) {
    const int off = sdp.free_offsets[b];
    const int len = (b + 1 < sdp.free_offsets.size() ? sdp.free_offsets[b + 1] : sdp.problem.num_free) - off;
    out.free_coefficients.push_back(free_vector.segment(off, len) * (fs / sdp.free_scales[b].get_d()));
  }
  return out;
}

/// Rebuilds a + sum_j g_j v^T M_j v + sum_i p_i h_i in floating point and
/// returns the largest coefficient difference to f.
inline double identity_residual(const SosProgram& prog, const ProgramSolution& sol) {
  std::unordered_map<Monomial, double, MonomialHash> acc;
  for (const auto& [m, c] : prog.f.terms()) acc[m] += c.get_d();
  acc[Monomial(prog.f.num_vars())] -= sol.bound;
  for (std::size_t j = 0; j < prog.gram_blocks.size(); ++j) {
    const auto& blk = prog.gram_blocks[j];
    const auto& v = blk.basis.entries;
    for (std::size_t r = 0; r < v.size(); ++r)
      for (std::size_t c = 0; c < v.size(); ++c) {
        const double q = sol.gram[j](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (q == 0.0) continue;
        const Monomial rc = v[r] * v[c];
        for (const auto& [m, coef] : blk.multiplier.terms()) acc[rc * m] -= q * coef.get_d();
      }
  }
  for (std::size_t b = 0; b < prog.free_blocks.size(); ++b) {
    const auto& blk = prog.free_blocks[b];
    for (std::size_t k = 0; k < blk.basis.size(); ++k) {
      const double q = sol.free_coefficients[b][static_cast<Eigen::Index>(k)];
      for (const auto& [m, coef] : blk.multiplier.terms()) acc[blk.basis.entries[k] * m] -= q * coef.get_d();
    }
  }
  double worst = 0.0;
  for (const auto& [m, v] : acc) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace gradtent
