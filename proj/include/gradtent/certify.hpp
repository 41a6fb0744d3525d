#pragma once

// SOS certificates from solved relaxations, exact residuals, the h_N
// identity, sampling checks and optional rational rounding.
//
// A certificate for the program f - a = sum_j g_j s_j + sum_i p_i h_i stores
// every s_j as a list of squared factors q (s_j = sum q^2), taken from the
// eigendecomposition of the Gram block, and the residual
//
//   r = f - a - sum_j g_j sum q^2 - sum_i p_i h_i
//
// expanded in exact rational arithmetic from the floating factors.

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gradtent/error.hpp"
#include "gradtent/hierarchy.hpp"
#include "gradtent/polynomial.hpp"
#include "gradtent/sdp.hpp"
#include "gradtent/sos_program.hpp"
#include "gradtent/tentacle.hpp"

namespace gradtent {

struct CertificateBlock {
  std::string label;
  Polynomial multiplier;          // g_j (the constant 1 for s)
  std::vector<Polynomial> factors;  // s_j = sum q^2
  // Exact Gram matrix over `basis`; when set it replaces the factors.
  std::vector<Monomial> basis;
  std::vector<std::vector<Rational>> gram;
};

struct CertificateFreeTerm {
  std::string label;
  Polynomial multiplier;  // h_i
  Polynomial coefficient; // p_i
};

struct Certificate {
  double bound = 0.0;
  Polynomial f;
  std::vector<CertificateBlock> blocks;
  std::vector<CertificateFreeTerm> free_terms;
  Polynomial residual;
  double residual_norm = 0.0;
  double min_eigenvalue = 0.0;  // smallest Gram eigenvalue before clamping (solver scaling)
  std::optional<Rational> exact_bound;  // set by a successful rational rounding

  /// Factors of the block with the constant multiplier (s).
  const std::vector<Polynomial>& sos_factors_s() const { return blocks.front().factors; }
  /// Factors of the first constrained block (t), empty if there is none.
  std::vector<Polynomial> sos_factors_t() const {
    return blocks.size() > 1 ? blocks[1].factors : std::vector<Polynomial>{};
  }
};

struct ExtractOptions {
  double eig_floor = 1e-7;
};

namespace detail {

inline Polynomial basis_combination(const MonomialBasis& basis, const Eigen::VectorXd& coeffs, double scale) {
  Polynomial q(basis.num_vars);
  for (std::size_t r = 0; r < basis.size(); ++r) {
    const double c = scale * coeffs[static_cast<Eigen::Index>(r)];
    if (c != 0.0) q.add_term(basis.entries[r], Rational(c));
  }
  return q;
}

/// sum_q q^2 as an exact polynomial.
inline Polynomial sum_of_squares(int n, const std::vector<Polynomial>& factors) {
  std::unordered_map<Monomial, Rational, MonomialHash> acc;
  for (const auto& q : factors) {
    const auto& terms = q.terms();
    for (auto a = terms.begin(); a != terms.end(); ++a) {
      acc[a->first * a->first] += a->second * a->second;
      for (auto b = std::next(a); b != terms.end(); ++b) acc[a->first * b->first] += 2 * a->second * b->second;
    }
  }
  Polynomial out(n);
  for (auto& [m, c] : acc) out.add_term(m, c);
  return out;
}

/// The SOS polynomial a block stands for.
inline Polynomial block_square(int n, const CertificateBlock& blk) {
  if (blk.gram.empty()) return sum_of_squares(n, blk.factors);
  Polynomial s(n);
  for (std::size_t r = 0; r < blk.basis.size(); ++r)
    for (std::size_t c = 0; c < blk.basis.size(); ++c)
      if (blk.gram[r][c] != 0) s.add_term(blk.basis[r] * blk.basis[c], blk.gram[r][c]);
  return s;
}

}  // namespace detail

/// f - a - sum_j g_j sum q^2 - sum_i p_i h_i, exactly.
inline Polynomial certificate_residual(const Polynomial& f, const Rational& bound,
                                       const std::vector<CertificateBlock>& blocks,
                                       const std::vector<CertificateFreeTerm>& free_terms) {
  const int n = f.num_vars();
  Polynomial r = f - Polynomial::constant(n, bound);
  for (const auto& blk : blocks) r -= blk.multiplier * detail::block_square(n, blk);
  for (const auto& ft : free_terms) r -= ft.multiplier * ft.coefficient;
  return r;
}

inline double max_abs_coefficient_d(const Polynomial& p) { return p.max_abs_coefficient().get_d(); }

/// Eigen-factorizes every Gram block of an optimal solution.  Throws
/// CertificateRejected if a block has an eigenvalue below -eig_floor (in the
/// scaling the solver worked in); eigenvalues in [-eig_floor, 0] become 0.
inline Certificate extract_certificate(const SosProgram& prog, const AssembledSdp& sdp, const SdpSolution& sol,
                                       const ExtractOptions& opts = {}) {
  if (sol.status != SolveStatus::optimal)
    throw Error("a certificate needs an optimal solution (status " + to_string(sol.status) + ")");
  if (sol.primal_blocks.size() != prog.gram_blocks.size()) throw Error("solution does not match the program");
  const int n = prog.f.num_vars();
  const double fs = sdp.objective_scale.get_d();
  Certificate cert;
  cert.f = prog.f;
  cert.bound = fs * sol.free_scalar();
  cert.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < prog.gram_blocks.size(); ++j) {
    const auto& gb = prog.gram_blocks[j];
    const Eigen::MatrixXd X = 0.5 * (sol.primal_blocks[j] + sol.primal_blocks[j].transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
    if (es.info() != Eigen::Success) throw Error("eigendecomposition of Gram block '" + gb.label + "' failed");
    const double lo = es.eigenvalues().minCoeff();
    cert.min_eigenvalue = std::min(cert.min_eigenvalue, lo);
    if (lo < -opts.eig_floor)
      throw CertificateRejected("Gram block '" + gb.label + "' has eigenvalue " + std::to_string(lo) +
                                " below -" + std::to_string(opts.eig_floor));
    const double unscale = fs / sdp.block_scales[j].get_d();
    CertificateBlock blk{gb.label, gb.multiplier, {}, {}, {}};
    for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
      const double lam = es.eigenvalues()[i];
      if (lam <= 0.0) continue;
      Polynomial q = detail::basis_combination(gb.basis, es.eigenvectors().col(i), std::sqrt(lam * unscale));
      if (!q.is_zero()) blk.factors.push_back(std::move(q));
    }
    cert.blocks.push_back(std::move(blk));
  }
  const ProgramSolution us = unscale_solution(sdp, sol.free_vector, sol.primal_blocks);
  for (std::size_t b = 0; b < prog.free_blocks.size(); ++b) {
    const auto& fb = prog.free_blocks[b];
    cert.free_terms.push_back({fb.label, fb.multiplier, detail::basis_combination(fb.basis, us.free_coefficients[b], 1.0)});
  }
  if (cert.blocks.empty()) cert.blocks.push_back({"s", Polynomial::constant(n, 1), {}, {}, {}});
  cert.residual = certificate_residual(cert.f, Rational(cert.bound), cert.blocks, cert.free_terms);
  cert.residual_norm = max_abs_coefficient_d(cert.residual);
  return cert;
}

inline Certificate extract_certificate(const Relaxation& relax, const SdpSolution& sol, const ExtractOptions& opts = {}) {
  return extract_certificate(relax.program, relax.sdp, sol, opts);
}

struct CertificateCheck {
  double recomputed_residual_norm = 0.0;
  bool residual_matches = false;  // stored residual equals the recomputed one
  bool accepted = false;          // matches and recomputed norm <= tol
};

/// Recomputes the residual from the stored factors and bound.
inline CertificateCheck verify_certificate(const Certificate& cert, double tol = 1e-5) {
  CertificateCheck chk;
  const Rational bound = cert.exact_bound ? *cert.exact_bound : Rational(cert.bound);
  const Polynomial r = certificate_residual(cert.f, bound, cert.blocks, cert.free_terms);
  chk.recomputed_residual_norm = max_abs_coefficient_d(r);
  chk.residual_matches = r == cert.residual;
  chk.accepted = chk.residual_matches && chk.recomputed_residual_norm <= tol;
  return chk;
}

// ---------------------------------------------------------------------------
// Exact identities

/// h_N = 1 - Y^N (1+X)^(N+1) in variables (X, Y).
inline Polynomial hn_polynomial(int N) {
  if (N < 1) throw Error("h_N needs N >= 1");
  const Polynomial one = Polynomial::constant(2, 1);
  const Polynomial X = Polynomial::variable(2, 0);
  const Polynomial Y = Polynomial::variable(2, 1);
  return one - Y.pow(static_cast<unsigned>(N)) * (one + X).pow(static_cast<unsigned>(N + 1));
}

/// N h_{N+1} - (N+1) z h_N == z^(N+1) X + (z-1)^2 sum_{k<N} (N-k) z^k with
/// z = Y(1+X), for the given h_N and h_{N+1}.
inline bool hn_identity_holds(int N, const Polynomial& hN, const Polynomial& hN1) {
  if (N < 1) return false;
  const Polynomial one = Polynomial::constant(2, 1);
  const Polynomial X = Polynomial::variable(2, 0);
  const Polynomial z = Polynomial::variable(2, 1) * (one + X);
  const Polynomial lhs = Rational(N) * hN1 - Rational(N + 1) * z * hN;
  Polynomial tail(2);
  for (int k = 0; k < N; ++k) tail += Rational(N - k) * z.pow(static_cast<unsigned>(k));
  const Polynomial rhs = z.pow(static_cast<unsigned>(N + 1)) * X + (z - one).pow(2) * tail;
  return lhs == rhs;
}

inline bool verify_hn_identity(int N) {
  if (N < 1) return false;
  return hn_identity_holds(N, hn_polynomial(N), hn_polynomial(N + 1));
}

/// (Z-1)^2 sum_{k<N} (N-k) Z^k == Z^(N+1) - (N+1) Z + N in one variable.
inline bool verify_univariate_identity(int N) {
  if (N < 1) return false;
  const Polynomial one = Polynomial::constant(1, 1);
  const Polynomial Z = Polynomial::variable(1, 0);
  Polynomial tail(1);
  for (int k = 0; k < N; ++k) tail += Rational(N - k) * Z.pow(static_cast<unsigned>(k));
  const Polynomial lhs = (Z - one).pow(2) * tail;
  const Polynomial rhs = Z.pow(static_cast<unsigned>(N + 1)) - Rational(N + 1) * Z + Polynomial::constant(1, N);
  return lhs == rhs;
}

// ---------------------------------------------------------------------------
// Sampling

struct SoundnessOptions {
  int samples = 10000;
  std::uint64_t seed = 1;
  double half_width = 2.0;  // sample box [-w, w]^n
  double membership_tol = kDefaultMembershipTol;
};

struct SoundnessReport {
  int samples = 0;
  int feasible = 0;
  int violations = 0;
  double worst_violation = 0.0;  // largest (a - slack) - f(x) over violating points
  std::vector<std::vector<double>> violating_points;  // first few
};

/// Draws points in the box, keeps those in the spec's set and checks
/// f(x) >= a - slack(x).  slack(x) bounds what the residual and the slightly
/// outside multiplier terms can contribute at x:
///   sum_a |r_a x^a| + sum_j |t_j(x)| max(0, -g_j(x)) + |sum_i p_i(x) h_i(x)|
/// plus a floating evaluation allowance.
inline SoundnessReport sample_soundness(const Polynomial& f, const Certificate& cert, const TentacleSpec& spec,
                                        const SoundnessOptions& opts = {}) {
  const int n = f.num_vars();
  if (spec.source().num_vars() != n) throw DimensionError("tentacle and polynomial live in different rings");
  const TentacleMembership member(spec);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> coord(-opts.half_width, opts.half_width);
  std::vector<Polynomial> squares;
  for (const auto& blk : cert.blocks) squares.push_back(detail::block_square(n, blk));
  const double a = cert.exact_bound ? cert.exact_bound->get_d() : cert.bound;
  SoundnessReport rep;
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int s = 0; s < opts.samples; ++s) {
    for (auto& xi : x) xi = coord(rng);
    ++rep.samples;
    if (!member.contains(x, opts.membership_tol)) continue;
    ++rep.feasible;
    double slack = cert.residual.evaluate_abs(x);
    for (std::size_t j = 0; j < cert.blocks.size(); ++j) {
      const double g = cert.blocks[j].multiplier.evaluate(x);
      if (g < 0) slack += std::abs(squares[j].evaluate(x)) * -g;
    }
    double ph = 0.0;
    for (const auto& ft : cert.free_terms) ph += ft.coefficient.evaluate(x) * ft.multiplier.evaluate(x);
    slack += std::abs(ph);
    slack += 1e-12 * (1.0 + f.evaluate_abs(x) + std::abs(a));
    const double fx = f.evaluate(x);
    const double deficit = (a - slack) - fx;
    if (deficit > 0) {
      ++rep.violations;
      rep.worst_violation = std::max(rep.worst_violation, deficit);
      if (rep.violating_points.size() < 5) rep.violating_points.push_back(x);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Rational rounding

struct RoundingOptions {
  int max_block = 60;            // exact LDL^T is only attempted up to this size
  double bound_margin = 1e-6;    // a is lowered by margin * (1 + |a|) before projecting
  int gram_denominator_bits = 40;
};

struct RoundingResult {
  bool success = false;
  std::string message;
  Rational bound;
};

namespace detail {

inline Rational round_to_dyadic(double v, int bits) {
  const double scaled = std::nearbyint(std::ldexp(v, bits));
  Rational r(scaled);
  r /= Rational(mpz_class(1) << bits);
  r.canonicalize();
  return r;
}

/// Exact LDL^T: true iff the symmetric rational matrix is PSD.
inline bool rational_psd(std::vector<std::vector<Rational>> A) {
  const std::size_t n = A.size();
  std::vector<bool> done(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t piv = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i] && (piv == n || A[i][i] > A[piv][piv])) piv = i;
    if (A[piv][piv] < 0) return false;
    if (A[piv][piv] == 0) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
          if (!done[i] && !done[k] && A[i][k] != 0) return false;
      return true;
    }
    done[piv] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i] || A[i][piv] == 0) continue;
      const Rational factor = A[i][piv] / A[piv][piv];
      for (std::size_t k = 0; k < n; ++k)
        if (!done[k]) A[i][k] -= factor * A[piv][k];
    }
  }
  return true;
}

}  // namespace detail

/// Attempts an exact certificate with a slightly lowered bound: the
/// constrained blocks keep their (rationalized) factors, the free terms are
/// rationalized, and the s Gram matrix is projected exactly onto the affine
/// space fixed by the identity and then tested with an exact LDL^T.  On
/// success the s block holds the exact Gram matrix, `cert.exact_bound` is set
/// and the residual is zero.
inline RoundingResult round_certificate(const SosProgram& prog, Certificate& cert, const RoundingOptions& opts = {}) {
  RoundingResult res;
  if (prog.gram_blocks.empty() || !prog.gram_blocks.front().multiplier.is_constant()) {
    res.message = "first Gram block is not the plain SOS term";
    return res;
  }
  const auto& basis = prog.gram_blocks.front().basis;
  const std::size_t k = basis.size();
  if (static_cast<int>(k) > opts.max_block) {
    res.message = "s block of size " + std::to_string(k) + " exceeds the rounding limit " + std::to_string(opts.max_block);
    return res;
  }
  const int n = prog.f.num_vars();
  res.bound = detail::round_to_dyadic(cert.bound - opts.bound_margin * (1.0 + std::abs(cert.bound)), 30);

  // Target for s: f - a - sum_{j>0} g_j t_j - sum p_i h_i, with the other terms as stored.
  Polynomial target = prog.f - Polynomial::constant(n, res.bound);
  for (std::size_t j = 1; j < cert.blocks.size(); ++j)
    target -= cert.blocks[j].multiplier * detail::block_square(n, cert.blocks[j]);
  for (const auto& ft : cert.free_terms) target -= ft.multiplier * ft.coefficient;

  // Starting Gram matrix from the floating factors of s.
  Eigen::MatrixXd G0 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (const auto& q : cert.blocks.front().factors) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < k; ++r) v[static_cast<Eigen::Index>(r)] = q.coefficient(basis.entries[r]).get_d();
    G0 += v * v.transpose();
  }
  std::vector<std::vector<Rational>> G(k, std::vector<Rational>(k));
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = r; c < k; ++c) {
      G[r][c] = detail::round_to_dyadic(G0(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)),
                                        opts.gram_denominator_bits);
      G[c][r] = G[r][c];
    }

  // Orthogonal projection: spread each monomial's mismatch evenly over its entries.
  std::unordered_map<Monomial, std::vector<std::pair<std::size_t, std::size_t>>, MonomialHash> cells;
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) cells[basis.entries[r] * basis.entries[c]].emplace_back(r, c);
  for (const auto& [m, c] : target.terms())
    if (!cells.count(m)) {
      res.message = "target has a monomial outside the s basis square";
      return res;
    }
  for (const auto& [m, list] : cells) {
    Rational have = 0;
    for (const auto& [r, c] : list) have += G[r][c];
    const Rational err = target.coefficient(m) - have;
    if (err == 0) continue;
    const Rational step = err / Rational(static_cast<long>(list.size()));
    for (const auto& [r, c] : list) G[r][c] += step;
  }
  if (!detail::rational_psd(G)) {
    res.message = "projected Gram matrix is not positive semidefinite";
    return res;
  }
  CertificateBlock& sblk = cert.blocks.front();
  sblk.basis = basis.entries;
  sblk.gram = std::move(G);
  sblk.factors.clear();
  cert.residual = certificate_residual(cert.f, res.bound, cert.blocks, cert.free_terms);
  cert.residual_norm = max_abs_coefficient_d(cert.residual);
  if (!cert.residual.is_zero()) {
    res.message = "projection left a nonzero residual";
    return res;
  }
  cert.exact_bound = res.bound;
  res.success = true;
  res.message = "exact certificate with bound " + res.bound.get_str();
  return res;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::json polynomial_to_json(const Polynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [m, c] : p.terms()) terms.push_back({m.exponents(), c.get_str()});
  return terms;
}

inline Polynomial polynomial_from_json(int n, const nlohmann::json& j) {
  Polynomial p(n);
  for (const auto& t : j) {
    Rational c(t.at(1).get<std::string>());
    c.canonicalize();
    p.add_term(Monomial(t.at(0).get<std::vector<int>>()), c);
  }
  return p;
}

}  // namespace detail

inline nlohmann::json to_json(const Certificate& c, const std::vector<std::string>& variables = {}) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : c.blocks) {
    nlohmann::json factors = nlohmann::json::array();
    for (const auto& q : b.factors) factors.push_back(detail::polynomial_to_json(q));
    nlohmann::json jb = {{"label", b.label}, {"multiplier", detail::polynomial_to_json(b.multiplier)}, {"factors", factors}};
    if (!b.gram.empty()) {
      nlohmann::json basis = nlohmann::json::array();
      for (const auto& m : b.basis) basis.push_back(m.exponents());
      nlohmann::json gram = nlohmann::json::array();
      for (const auto& row : b.gram) {
        nlohmann::json jr = nlohmann::json::array();
        for (const auto& v : row) jr.push_back(v.get_str());
        gram.push_back(jr);
      }
      jb["basis"] = basis;
      jb["gram"] = gram;
    }
    blocks.push_back(jb);
  }
  nlohmann::json free = nlohmann::json::array();
  for (const auto& ft : c.free_terms)
    free.push_back({{"label", ft.label},
                    {"multiplier", detail::polynomial_to_json(ft.multiplier)},
                    {"coefficient", detail::polynomial_to_json(ft.coefficient)}});
  nlohmann::json j = {{"format", "gradtent-certificate"},
                      {"version", 1},
                      {"variables", variables.empty() ? default_variable_names(c.f.num_vars()) : variables},
                      {"f", detail::polynomial_to_json(c.f)},
                      {"bound", c.bound},
                      {"bound_rational", Rational(c.bound).get_str()},
                      {"blocks", blocks},
                      {"free_terms", free},
                      {"residual", detail::polynomial_to_json(c.residual)},
                      {"residual_norm", c.residual_norm},
                      {"min_eigenvalue", c.min_eigenvalue}};
  if (c.exact_bound) j["exact_bound"] = c.exact_bound->get_str();
  return j;
}

inline Certificate certificate_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "gradtent-certificate") throw Error("not a gradtent-certificate document");
  const int n = static_cast<int>(j.at("variables").size());
  Certificate c;
  c.f = detail::polynomial_from_json(n, j.at("f"));
  c.bound = j.at("bound").get<double>();
  for (const auto& b : j.at("blocks")) {
    CertificateBlock blk{b.at("label").get<std::string>(), detail::polynomial_from_json(n, b.at("multiplier")), {}, {}, {}};
    for (const auto& q : b.at("factors")) blk.factors.push_back(detail::polynomial_from_json(n, q));
    if (b.contains("gram")) {
      for (const auto& m : b.at("basis")) blk.basis.emplace_back(m.get<std::vector<int>>());
      for (const auto& row : b.at("gram")) {
        std::vector<Rational> r;
        for (const auto& v : row) {
          Rational q(v.get<std::string>());
          q.canonicalize();
          r.push_back(q);
        }
        if (r.size() != blk.basis.size()) throw Error("certificate Gram row has the wrong length");
        blk.gram.push_back(std::move(r));
      }
      if (blk.gram.size() != blk.basis.size()) throw Error("certificate Gram matrix has the wrong size");
    }
    c.blocks.push_back(std::move(blk));
  }
  for (const auto& ft : j.at("free_terms"))
    c.free_terms.push_back({ft.at("label").get<std::string>(), detail::polynomial_from_json(n, ft.at("multiplier")),
                            detail::polynomial_from_json(n, ft.at("coefficient"))});
  c.residual = detail::polynomial_from_json(n, j.at("residual"));
  c.residual_norm = j.at("residual_norm").get<double>();
  c.min_eigenvalue = j.value("min_eigenvalue", 0.0);
  if (j.contains("exact_bound")) {
    Rational e(j.at("exact_bound").get<std::string>());
    e.canonicalize();
    c.exact_bound = e;
  }
  return c;
}

}  // namespace gradtent
