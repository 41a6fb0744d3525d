#pragma once

// Primal-dual interior-point method for the block SDP of sdp.hpp.
//
// Infeasible-start path following with the HKM search direction and a
// Mehrotra predictor-corrector.  Free variables enter the Newton system
// directly: with the Schur complement M_ik = tr(A_i X A_k Z^-1) the step
// solves [M -B; B^T 0] [dy; du] = [h; r_f] by block elimination.  All linear
// algebra is dense and single threaded, so a solve is a deterministic
// function of its inputs.
//
// Infeasibility: when the primal has no feasible point, the dual objective
// b^T y runs off to -infinity along an (approximate) Farkas ray.  The solve
// stops with status `infeasible` once b^T y < 0 and the normalized ray
// y / |b^T y| satisfies B^T y ~ 0 and A^*(y) ~ Z (PSD) to within tol_feas,
// or once b^T y drops below -infeasibility_threshold.  `unbounded` is the
// mirror test on the primal side.
//
// Each Newton system is solved with a Jacobi-scaled Cholesky factorization of
// the Schur complement followed by a few steps of iterative refinement.  A
// run that makes no progress in stall_window iterations ends with
// numerical_error; small reduced problems are then retried in long double.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "gradtent/error.hpp"
#include "gradtent/sdp.hpp"

namespace gradtent {

namespace detail {

struct TripletEntry {
  int row;
  int col;
  double value;
};

// The nonzero part of one constraint matrix inside one block.
struct BlockTerm {
  int constraint;
  std::vector<TripletEntry> entries;
  std::vector<int> cols;  // distinct row/column indices touched
};

struct BlockData {
  int dim = 0;
  std::vector<BlockTerm> terms;  // sorted by constraint index
};

template <typename T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Cholesky of the Jacobi-scaled Schur complement.
template <typename T>
struct SchurFactor {
  VecT<T> scale;
  Eigen::LLT<MatT<T>> llt;

  template <typename Rhs>
  MatT<T> solve(const Rhs& rhs) const {
    MatT<T> t = scale.asDiagonal() * rhs;
    t = llt.solve(t);
    return scale.asDiagonal() * t;
  }
};

// Everything the Newton solves of one iteration share.  Rows without any
// block entry make M singular; the full system [M B; B^T 0] is then
// factored with LU instead of eliminating du.
template <typename T>
struct NewtonFactor {
  SchurFactor<T> schur;
  MatT<T> MinvB;
  Eigen::CompleteOrthogonalDecomposition<MatT<T>> S;
  bool augmented = false;
  Eigen::PartialPivLU<MatT<T>> kkt;
};

// Rational -> T without losing the bits beyond double precision.
template <typename T>
T to_scalar(const Rational& q) {
  const double hi = q.get_d();
  if constexpr (sizeof(T) > sizeof(double)) {
    Rational rest = q - Rational(hi);
    return static_cast<T>(hi) + static_cast<T>(rest.get_d());
  } else {
    return static_cast<T>(hi);
  }
}

template <typename T>
class InteriorPointSolver {
  using Mat = MatT<T>;
  using Vec = VecT<T>;

 public:
  InteriorPointSolver(const SdpProblem& problem, const SolverSettings& settings) : settings_(settings) {
    m_ = problem.num_constraints();
    p_ = problem.num_free;
    blocks_.resize(problem.block_dims.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j) blocks_[j].dim = problem.block_dims[j];
    b_.resize(m_);
    B_ = Mat::Zero(m_, p_);
    c_.resize(p_);
    for (int l = 0; l < p_; ++l) c_[l] = static_cast<T>(problem.objective[static_cast<std::size_t>(l)]);
    for (int i = 0; i < m_; ++i) {
      const auto& con = problem.constraints[static_cast<std::size_t>(i)];
      b_[i] = to_scalar<T>(con.rhs);
      for (const auto& [idx, v] : con.free_terms) B_(i, idx) += static_cast<T>(v);
      std::map<int, std::map<std::pair<int, int>, double>> per_block;
      for (const auto& e : con.entries) per_block[e.block][{e.row, e.col}] += e.value;
      for (const auto& [blk, ents] : per_block) {
        BlockTerm term{i, {}, {}};
        for (const auto& [rc, v] : ents) {
          if (v == 0.0) continue;
          term.entries.push_back({rc.first, rc.second, v});
          term.cols.push_back(rc.first);
          term.cols.push_back(rc.second);
        }
        if (term.entries.empty()) continue;
        std::sort(term.cols.begin(), term.cols.end());
        term.cols.erase(std::unique(term.cols.begin(), term.cols.end()), term.cols.end());
        blocks_[static_cast<std::size_t>(blk)].terms.push_back(std::move(term));
      }
    }
    std::vector<char> covered(static_cast<std::size_t>(m_), 0);
    for (const auto& blk : blocks_)
      for (const auto& term : blk.terms) covered[static_cast<std::size_t>(term.constraint)] = 1;
    augmented_ = std::find(covered.begin(), covered.end(), 0) != covered.end();
  }

  SdpSolution solve() {
    using std::abs;
    using std::sqrt;
    const int nb = static_cast<int>(blocks_.size());
    int total_dim = 0;
    for (const auto& blk : blocks_) total_dim += blk.dim;

    const T start = T(1) + (m_ > 0 ? b_.cwiseAbs().maxCoeff() : T(0));
    std::vector<Mat> X(nb), Z(nb);
    for (int j = 0; j < nb; ++j) {
      X[j] = start * Mat::Identity(blocks_[j].dim, blocks_[j].dim);
      Z[j] = X[j];
    }
    Vec y = Vec::Zero(m_);
    Vec u = Vec::Zero(p_);

    const T norm_b = b_.norm();
    const T norm_c = c_.norm();
    const T tol_gap = static_cast<T>(settings_.tol_gap);
    const T tol_feas = static_cast<T>(settings_.tol_feas);

    SdpSolution sol;
    sol.status = SolveStatus::max_iterations;
    int stalled = 0;
    T best_merit = std::numeric_limits<T>::infinity();
    int best_iter = 0;
    T rp0 = 0, mu0 = 0;

    for (int iter = 0;; ++iter) {
      // Residuals at the current iterate.
      const Vec rp = b_ - apply_A(X) - B_ * u;
      std::vector<Mat> Rd = apply_At(y);
      for (int j = 0; j < nb; ++j) Rd[j] -= Z[j];
      const Vec rf = c_ - B_.transpose() * y;

      const T pobj = c_.dot(u);
      const T dobj = b_.dot(y);
      T compl_xz = 0, coupling_xr = 0, rd_norm_sq = 0;
      for (int j = 0; j < nb; ++j) {
        compl_xz += X[j].cwiseProduct(Z[j]).sum();
        coupling_xr += X[j].cwiseProduct(Rd[j]).sum();
        rd_norm_sq += Rd[j].squaredNorm();
      }
      const T pinf = rp.norm() / (T(1) + norm_b);
      const T dinf = (sqrt(rd_norm_sq) + rf.norm()) / (T(1) + norm_c);
      const T scale = T(1) + abs(pobj) + abs(dobj);
      const T coupling = abs(coupling_xr) + abs(rp.dot(y)) + abs(rf.dot(u));
      const T rel_gap = std::max({abs(dobj - pobj), compl_xz, coupling}) / scale;

      IterationRecord rec;
      rec.iter = iter;
      rec.primal_objective = static_cast<double>(pobj);
      rec.dual_objective = static_cast<double>(dobj);
      rec.complementarity = static_cast<double>(compl_xz);
      rec.coupling = static_cast<double>(coupling);
      rec.relative_gap = static_cast<double>(rel_gap);
      rec.primal_infeasibility = static_cast<double>(pinf);
      rec.dual_infeasibility = static_cast<double>(dinf);
      rec.step_primal = static_cast<double>(last_step_p_);
      rec.step_dual = static_cast<double>(last_step_d_);
      sol.history.push_back(rec);
      if (settings_.verbose)
        std::clog << std::scientific << std::setprecision(3) << "iter=" << iter << " pobj=" << rec.primal_objective
                  << " dobj=" << rec.dual_objective << " gap=" << rec.relative_gap << " pinf=" << rec.primal_infeasibility
                  << " dinf=" << rec.dual_infeasibility << " step_p=" << rec.step_primal << " step_d=" << rec.step_dual
                  << "\n";

      sol.iterations = iter;
      if (rel_gap <= tol_gap && pinf <= tol_feas && dinf <= tol_feas) {
        sol.status = SolveStatus::optimal;
        break;
      }
      // Primal infeasibility: normalized dual ray.
      if (dobj < 0) {
        const T ray = (rf - c_).norm() / -dobj + sqrt(rd_norm_sq) / -dobj;
        if (dobj < -static_cast<T>(settings_.infeasibility_threshold) || (-dobj > 1 && ray <= tol_feas)) {
          sol.status = SolveStatus::infeasible;
          sol.message = "dual objective diverges along a Farkas ray";
          break;
        }
      }
      // Dual infeasibility: normalized primal ray.
      if (pobj > 0) {
        const T ray = (b_ - rp).norm() / pobj;
        if (pobj > static_cast<T>(settings_.infeasibility_threshold) || (pobj > 1 && ray <= tol_feas)) {
          sol.status = SolveStatus::unbounded;
          sol.message = "primal objective diverges along a recession direction";
          break;
        }
      }
      const T merit = std::max({rel_gap, pinf, dinf});
      if (merit < T(0.5) * best_merit) {
        best_merit = merit;
        best_iter = iter;
      } else if (iter - best_iter >= settings_.stall_window) {
        sol.status = SolveStatus::numerical_error;
        sol.message = "no progress in " + std::to_string(settings_.stall_window) + " iterations";
        break;
      }
      if (iter >= settings_.max_iter) {
        sol.status = SolveStatus::max_iterations;
        sol.message = "iteration limit reached";
        break;
      }

      const T mu = compl_xz / total_dim;
      if (iter == 0) {
        rp0 = std::max(rp.norm(), std::numeric_limits<T>::min());
        mu0 = std::max(mu, std::numeric_limits<T>::min());
      }

      // Factorizations shared by predictor and corrector.
      std::vector<Mat> Zinv(nb);
      std::vector<Eigen::LLT<Mat>> Xchol(nb), Zchol(nb);
      bool ok = true;
      for (int j = 0; j < nb && ok; ++j) {
        Xchol[j].compute(X[j]);
        Zchol[j].compute(Z[j]);
        if (Xchol[j].info() != Eigen::Success || Zchol[j].info() != Eigen::Success) {
          ok = false;
          break;
        }
        Zinv[j] = Zchol[j].solve(Mat::Identity(blocks_[j].dim, blocks_[j].dim));
        Zinv[j] = (T(0.5) * (Zinv[j] + Zinv[j].transpose())).eval();
      }
      if (!ok) {
        sol.status = SolveStatus::numerical_error;
        sol.message = "iterate lost positive definiteness";
        break;
      }

      Mat M = schur_complement(X, Zinv);
      NewtonFactor<T> F;
      if (augmented_) {
        F.augmented = true;
        Mat K = Mat::Zero(m_ + p_, m_ + p_);
        K.topLeftCorner(m_, m_) = M;
        K.topRightCorner(m_, p_) = B_;
        K.bottomLeftCorner(p_, m_) = B_.transpose();
        F.kkt.compute(K);
      } else {
        if (!factor_schur(M, F.schur)) {
          sol.status = SolveStatus::numerical_error;
          sol.message = "Schur complement factorization failed";
          break;
        }
        F.MinvB = p_ > 0 ? Mat(F.schur.solve(B_)) : Mat(m_, 0);
        if (p_ > 0) F.S.compute(Mat(B_.transpose() * F.MinvB));
      }

      // Predictor (sigma = 0).
      std::vector<Mat> dXa(nb), dZa(nb), dX(nb), dZ(nb);
      Vec dya, dua, dyv, duv;
      newton_step(X, Zinv, Rd, rp, rf, F, T(0), nullptr, nullptr, dXa, dZa, dya, dua);
      const T ap_aff = std::min(T(1), max_step(Xchol, dXa));
      const T ad_aff = std::min(T(1), max_step(Zchol, dZa));
      T mu_aff = 0;
      for (int j = 0; j < nb; ++j) mu_aff += (X[j] + ap_aff * dXa[j]).cwiseProduct(Z[j] + ad_aff * dZa[j]).sum();
      mu_aff /= total_dim;
      T sigma = mu > 0 ? std::pow(std::max(mu_aff, T(0)) / mu, T(3)) : T(0);
      sigma = std::clamp(sigma, T(0), T(1));
      // While the primal residual is above tolerance, complementarity may
      // not shrink faster than it; otherwise X gets pinned to a face.
      const T mu_floor = pinf > tol_feas ? std::min(mu, mu0 * rp.norm() / rp0) : T(0);
      const T target_mu = std::max(sigma * mu, mu_floor);

      // Corrector.
      newton_step(X, Zinv, Rd, rp, rf, F, target_mu, &dXa, &dZa, dX, dZ, dyv, duv);
      const T gamma = T(0.9) + T(0.09) * std::min(ap_aff, ad_aff);
      const T ap = std::min(T(1), gamma * max_step(Xchol, dX));
      const T ad = std::min(T(1), gamma * max_step(Zchol, dZ));

      for (int j = 0; j < nb; ++j) {
        X[j] += ap * dX[j];
        Z[j] += ad * dZ[j];
        X[j] = (T(0.5) * (X[j] + X[j].transpose())).eval();
        Z[j] = (T(0.5) * (Z[j] + Z[j].transpose())).eval();
      }
      if (p_ > 0) u += ap * duv;
      y += ad * dyv;
      last_step_p_ = ap;
      last_step_d_ = ad;

      stalled = (ap < T(1e-8) && ad < T(1e-8)) ? stalled + 1 : 0;
      if (stalled >= 5) {
        sol.status = SolveStatus::numerical_error;
        sol.message = "step lengths collapsed";
        sol.iterations = iter + 1;
        break;
      }
    }

    for (int j = 0; j < nb; ++j) {
      sol.primal_blocks.push_back(X[j].template cast<double>());
      sol.dual_blocks.push_back(Z[j].template cast<double>());
    }
    sol.free_vector = u.template cast<double>();
    sol.dual_vector = y.template cast<double>();
    sol.objective_primal = static_cast<double>(c_.dot(u));
    sol.objective_dual = static_cast<double>(b_.dot(y));
    if (!sol.history.empty()) {
      sol.gap = sol.history.back().relative_gap;
      sol.primal_infeasibility = sol.history.back().primal_infeasibility;
      sol.dual_infeasibility = sol.history.back().dual_infeasibility;
    }
    return sol;
  }

 private:
  Vec apply_A(const std::vector<Mat>& K) const {
    Vec out = Vec::Zero(m_);
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      const auto& Kj = K[j];
      for (const auto& term : blocks_[j].terms) {
        T s = 0;
        for (const auto& e : term.entries)
          s += e.row == e.col ? static_cast<T>(e.value) * Kj(e.row, e.row)
                              : static_cast<T>(e.value) * (Kj(e.row, e.col) + Kj(e.col, e.row));
        out[term.constraint] += s;
      }
    }
    return out;
  }

  std::vector<Mat> apply_At(const Vec& y) const {
    std::vector<Mat> out(blocks_.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      out[j] = Mat::Zero(blocks_[j].dim, blocks_[j].dim);
      for (const auto& term : blocks_[j].terms) {
        const T yi = y[term.constraint];
        if (yi == 0) continue;
        for (const auto& e : term.entries) {
          out[j](e.row, e.col) += yi * static_cast<T>(e.value);
          if (e.row != e.col) out[j](e.col, e.row) += yi * static_cast<T>(e.value);
        }
      }
    }
    return out;
  }

  // M_ik = tr(A_i X A_k Zinv), assembled block by block from G_i = X A_i Zinv.
  Mat schur_complement(const std::vector<Mat>& X, const std::vector<Mat>& Zinv) const {
    Mat M = Mat::Zero(m_, m_);
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      const auto& blk = blocks_[j];
      const int n = blk.dim;
      std::vector<int> pos(static_cast<std::size_t>(n), -1);
      for (std::size_t a = 0; a < blk.terms.size(); ++a) {
        const auto& term = blk.terms[a];
        const int nc = static_cast<int>(term.cols.size());
        for (int q = 0; q < nc; ++q) pos[static_cast<std::size_t>(term.cols[static_cast<std::size_t>(q)])] = q;
        Mat XA = Mat::Zero(n, nc);
        for (const auto& e : term.entries) {
          XA.col(pos[static_cast<std::size_t>(e.col)]) += static_cast<T>(e.value) * X[j].col(e.row);
          if (e.row != e.col) XA.col(pos[static_cast<std::size_t>(e.row)]) += static_cast<T>(e.value) * X[j].col(e.col);
        }
        Mat Zrows(nc, n);
        for (int q = 0; q < nc; ++q) Zrows.row(q) = Zinv[j].row(term.cols[static_cast<std::size_t>(q)]);
        Mat G(n, n);
        G.noalias() = XA * Zrows;
        const int i = term.constraint;
        for (std::size_t b = a; b < blk.terms.size(); ++b) {
          const auto& other = blk.terms[b];
          T s = 0;
          for (const auto& e : other.entries)
            s += e.row == e.col ? static_cast<T>(e.value) * G(e.row, e.row)
                                : static_cast<T>(e.value) * (G(e.row, e.col) + G(e.col, e.row));
          M(i, other.constraint) += s;
          if (other.constraint != i) M(other.constraint, i) += s;
        }
        for (int q = 0; q < nc; ++q) pos[static_cast<std::size_t>(term.cols[static_cast<std::size_t>(q)])] = -1;
      }
    }
    return M;
  }

  // Falls back to a small diagonal shift when the scaled matrix is
  // numerically singular.
  static bool factor_schur(Mat& M, SchurFactor<T>& fac) {
    using std::sqrt;
    M = (T(0.5) * (M + M.transpose())).eval();
    fac.scale.resize(M.rows());
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      fac.scale[i] = T(1) / sqrt(std::max(std::abs(M(i, i)), std::numeric_limits<T>::min()));
    const Mat Ms = fac.scale.asDiagonal() * M * fac.scale.asDiagonal();
    fac.llt.compute(Ms);
    if (fac.llt.info() == Eigen::Success) return true;
    for (T reg = T(1e-14); reg <= T(1e-6); reg *= T(100)) {
      Mat Mr = Ms;
      Mr.diagonal().array() += reg;
      fac.llt.compute(Mr);
      if (fac.llt.info() == Eigen::Success) return true;
    }
    return false;
  }

  // HKM direction for complementarity target `target_mu` (with second-order
  // term -dXa dZa when `dXa`/`dZa` are given).
  void newton_step(const std::vector<Mat>& X, const std::vector<Mat>& Zinv, const std::vector<Mat>& Rd, const Vec& rp,
                   const Vec& rf, const NewtonFactor<T>& F, T target_mu, const std::vector<Mat>* dXa,
                   const std::vector<Mat>* dZa, std::vector<Mat>& dX, std::vector<Mat>& dZ, Vec& dy, Vec& du) const {
    const std::size_t nb = blocks_.size();
    // K = target_mu Zinv - X - X Rd Zinv - dXa dZa Zinv;  M dy - B du = A(K) - rp.
    std::vector<Mat> K(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      K[j] = target_mu * Zinv[j] - X[j] - X[j] * Rd[j] * Zinv[j];
      if (dXa != nullptr) K[j] -= (*dXa)[j] * (*dZa)[j] * Zinv[j];
    }
    const Vec h = apply_A(K) - rp;
    reduced_solve(F, h, rf, dy, du);
    auto assemble = [&] {
      dZ = apply_At(dy);
      dX.resize(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        dZ[j] += Rd[j];
        Mat t = target_mu * Zinv[j] - X[j] - X[j] * dZ[j] * Zinv[j];
        if (dXa != nullptr) t -= (*dXa)[j] * (*dZa)[j] * Zinv[j];
        dX[j] = T(0.5) * (t + t.transpose());
      }
    };
    assemble();
    // Iterative refinement against the unfactored operator.
    const T target = T(1e-14) * (T(1) + rp.norm());
    for (int pass = 0; pass < 3; ++pass) {
      const Vec ep = rp - apply_A(dX) - B_ * du;
      const Vec ef = rf - B_.transpose() * dy;
      if (ep.norm() + ef.norm() <= target) break;
      Vec cy, cu;
      reduced_solve(F, -ep, ef, cy, cu);
      dy += cy;
      if (p_ > 0) du += cu;
      assemble();
    }
  }

  // Solves  M dy - B du = h,  B^T dy = rf  by block elimination of du.
  void reduced_solve(const NewtonFactor<T>& F, const Vec& h, const Vec& rf, Vec& dy, Vec& du) const {
    if (F.augmented) {
      Vec rhs(m_ + p_);
      rhs << h, rf;
      const Vec sol = F.kkt.solve(rhs);
      dy = sol.head(m_);
      du = -sol.tail(p_);
      return;
    }
    const Vec Minv_h = F.schur.solve(h);
    if (p_ > 0) {
      du = F.S.solve(rf - B_.transpose() * Minv_h);
      dy = Minv_h + F.MinvB * du;
    } else {
      du = Vec::Zero(0);
      dy = Minv_h;
    }
  }

  // Largest alpha with V + alpha dV still PSD, given the Cholesky factor of V.
  static T max_step(const std::vector<Eigen::LLT<Mat>>& chol, const std::vector<Mat>& dV) {
    T alpha = std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < dV.size(); ++j) {
      const auto L = chol[j].matrixL();
      Mat W = L.solve(dV[j]);
      W = L.solve(W.transpose()).eval();
      W = (T(0.5) * (W + W.transpose())).eval();
      const T lmin = Eigen::SelfAdjointEigenSolver<Mat>(W, Eigen::EigenvaluesOnly).eigenvalues()[0];
      if (lmin < 0) alpha = std::min(alpha, T(-1) / lmin);
    }
    return alpha;
  }

  SolverSettings settings_;
  int m_ = 0;
  int p_ = 0;
  bool augmented_ = false;
  std::vector<BlockData> blocks_;
  Vec b_;
  Mat B_;
  Vec c_;
  T last_step_p_ = 0;
  T last_step_d_ = 0;
};

// Diagonal facial reduction.  A row reading  sum_k v_k X_j[k][k] = 0  with all
// v_k of one sign and no free variable forces those diagonal entries, and
// hence the whole row and column k of X_j, to vanish.  Such indices are
// removed and the scan repeats until nothing changes.  Rows left without
// any term are dropped (or prove infeasibility when their rhs is nonzero).
struct Presolved {
  SdpProblem reduced;
  std::vector<std::vector<int>> kept;  // per original block, surviving indices
  std::vector<int> block_map;          // original block -> reduced block, or -1
  std::vector<int> row_map;            // reduced row -> original row
  bool infeasible = false;
  int removed_indices = 0;
};

inline Presolved presolve(const SdpProblem& problem) {
  const std::size_t nb = problem.block_dims.size();
  std::vector<std::vector<char>> alive(nb);
  for (std::size_t j = 0; j < nb; ++j) alive[j].assign(static_cast<std::size_t>(problem.block_dims[j]), 1);
  auto is_alive = [&](const SdpEntry& e) {
    return alive[static_cast<std::size_t>(e.block)][static_cast<std::size_t>(e.row)] &&
           alive[static_cast<std::size_t>(e.block)][static_cast<std::size_t>(e.col)];
  };

  Presolved out;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& con : problem.constraints) {
      if (con.rhs != 0) continue;
      bool has_free = false;
      for (const auto& [idx, v] : con.free_terms) has_free = has_free || v != 0.0;
      if (has_free) continue;
      int sign = 0;
      bool diagonal_same_sign = true;
      bool any = false;
      for (const auto& e : con.entries) {
        if (e.value == 0.0 || !is_alive(e)) continue;
        any = true;
        const int s = e.value > 0 ? 1 : -1;
        if (e.row != e.col || (sign != 0 && s != sign)) {
          diagonal_same_sign = false;
          break;
        }
        sign = s;
      }
      if (!any || !diagonal_same_sign) continue;
      for (const auto& e : con.entries) {
        if (e.value == 0.0 || !is_alive(e)) continue;
        alive[static_cast<std::size_t>(e.block)][static_cast<std::size_t>(e.row)] = 0;
        ++out.removed_indices;
        changed = true;
      }
    }
  }

  out.kept.resize(nb);
  out.block_map.assign(nb, -1);
  std::vector<std::vector<int>> new_index(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    new_index[j].assign(alive[j].size(), -1);
    for (std::size_t k = 0; k < alive[j].size(); ++k)
      if (alive[j][k]) {
        new_index[j][k] = static_cast<int>(out.kept[j].size());
        out.kept[j].push_back(static_cast<int>(k));
      }
    if (!out.kept[j].empty()) {
      out.block_map[j] = static_cast<int>(out.reduced.block_dims.size());
      out.reduced.block_dims.push_back(static_cast<int>(out.kept[j].size()));
    }
  }
  out.reduced.num_free = problem.num_free;
  out.reduced.objective = problem.objective;
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& con = problem.constraints[i];
    SdpConstraint rc;
    rc.rhs = con.rhs;
    for (const auto& [idx, v] : con.free_terms)
      if (v != 0.0) rc.free_terms.emplace_back(idx, v);
    for (const auto& e : con.entries) {
      if (e.value == 0.0 || !is_alive(e)) continue;
      const auto j = static_cast<std::size_t>(e.block);
      int r = new_index[j][static_cast<std::size_t>(e.row)], c = new_index[j][static_cast<std::size_t>(e.col)];
      if (r > c) std::swap(r, c);
      rc.entries.push_back({out.block_map[j], r, c, e.value});
    }
    if (rc.entries.empty() && rc.free_terms.empty()) {
      if (rc.rhs != 0) out.infeasible = true;
      continue;
    }
    out.row_map.push_back(static_cast<int>(i));
    out.reduced.constraints.push_back(std::move(rc));
  }
  return out;
}

inline SdpSolution expand_solution(const SdpProblem& problem, const Presolved& pre, SdpSolution reduced) {
  SdpSolution out = std::move(reduced);
  std::vector<Eigen::MatrixXd> primal, dual;
  for (std::size_t j = 0; j < problem.block_dims.size(); ++j) {
    const int n = problem.block_dims[j];
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n), Z = Eigen::MatrixXd::Zero(n, n);
    const int rb = pre.block_map[j];
    if (rb >= 0 && static_cast<std::size_t>(rb) < out.primal_blocks.size()) {
      const auto& kept = pre.kept[j];
      for (std::size_t a = 0; a < kept.size(); ++a)
        for (std::size_t b = 0; b < kept.size(); ++b) {
          X(kept[a], kept[b]) = out.primal_blocks[static_cast<std::size_t>(rb)](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
          if (static_cast<std::size_t>(rb) < out.dual_blocks.size())
            Z(kept[a], kept[b]) = out.dual_blocks[static_cast<std::size_t>(rb)](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
    }
    primal.push_back(std::move(X));
    dual.push_back(std::move(Z));
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(problem.num_constraints());
  for (std::size_t r = 0; r < pre.row_map.size() && static_cast<Eigen::Index>(r) < out.dual_vector.size(); ++r)
    y[pre.row_map[r]] = out.dual_vector[static_cast<Eigen::Index>(r)];
  out.primal_blocks = std::move(primal);
  out.dual_blocks = std::move(dual);
  out.dual_vector = std::move(y);
  return out;
}

}  // namespace detail

/// Built-in interior-point solve (after diagonal facial reduction).  Throws
/// BudgetError above the desk-scale limits.
inline SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings = {}) {
  validate(problem);
  if (settings.tol_gap <= 0 || settings.tol_feas <= 0 || settings.max_iter < 1 || settings.infeasibility_threshold <= 0)
    throw Error("solver tolerances must be positive and max_iter at least 1");
  if (problem.num_constraints() > settings.max_constraints)
    throw BudgetError("SDP has " + std::to_string(problem.num_constraints()) + " constraints; the limit is " +
                      std::to_string(settings.max_constraints));
  for (int d : problem.block_dims)
    if (d > settings.max_block_dim)
      throw BudgetError("SDP block of size " + std::to_string(d) + " exceeds the limit " +
                        std::to_string(settings.max_block_dim));

  const detail::Presolved pre = detail::presolve(problem);
  if (pre.infeasible) {
    SdpSolution sol;
    sol.status = SolveStatus::infeasible;
    sol.message = "presolve: a constraint with nonzero right-hand side only involves entries forced to zero";
    sol.free_vector = Eigen::VectorXd::Zero(problem.num_free);
    return detail::expand_solution(problem, pre, std::move(sol));
  }
  auto failed = [](const SdpSolution& s) {
    return s.status == SolveStatus::numerical_error || s.status == SolveStatus::max_iterations;
  };
  auto attempt = [&](const SdpProblem& prob) {
    SdpSolution sol = detail::InteriorPointSolver<double>(prob, settings).solve();
    if (failed(sol) && prob.num_constraints() <= settings.extended_precision_max_constraints) {
      // Retry in extended precision; the tail of ill-conditioned solves is
      // usually limited by rounding in the Newton system.
      SdpSolution wide = detail::InteriorPointSolver<long double>(prob, settings).solve();
      wide.message = wide.message.empty() ? "extended precision" : wide.message + " (extended precision)";
      if (!failed(wide)) sol = std::move(wide);
    }
    return sol;
  };
  SdpSolution reduced = attempt(pre.reduced);
  if (failed(reduced) && pre.removed_indices > 0 &&
      problem.num_constraints() <= settings.extended_precision_max_constraints) {
    // Facial reduction can leave a problem whose optimum is only approached
    // at infinity; the original formulation sometimes behaves better.
    SdpSolution full = attempt(problem);
    if (!failed(full)) {
      full.message = full.message.empty() ? "without facial reduction" : full.message + " (without facial reduction)";
      return full;
    }
  }
  return detail::expand_solution(problem, pre, std::move(reduced));
}

}  // namespace gradtent
