#pragma once

#include "rdo/common.hpp"

#include <lapacke.h>

#include <algorithm>
#include <chrono>
#include <vector>

namespace rdo {

/// Dense least-squares problem min ||A x - b||_2.
///
/// Column ordering is fixed by the coefficient flattening used throughout:
/// column index = i*k + j for trunk index i in [0,p) and branch index j in
/// [0,k). Assembly code owns that convention; this module only sees a matrix.
struct LsqSystem {
  Matrix design;  // M x P
  Vector rhs;     // M

  Eigen::Index rows() const { return design.rows(); }
  Eigen::Index cols() const { return design.cols(); }
};

struct LsqSolution {
  Vector coefficients;
  double residual_norm = 0.0;
  Eigen::Index effective_rank = 0;
  double solve_seconds = 0.0;
};

namespace detail {

inline void check_system(const LsqSystem& sys) {
  require(sys.rows() >= 1 && sys.cols() >= 1, Err::EmptySystem, "least-squares system is empty");
  require(sys.rhs.size() == sys.rows(), Err::LengthMismatch, "rhs length != row count");
  require(sys.design.allFinite() && sys.rhs.allFinite(), Err::NonFinite,
          "least-squares system contains NaN/Inf");
}

}  // namespace detail

/// Minimum-norm least-squares solve by truncated SVD (LAPACK dgelsd).
/// Singular values below rel_tol * sigma_max are discarded; the returned
/// effective_rank counts the retained ones. An optional ridge parameter
/// solves the Tikhonov-augmented system [A; sqrt(ridge) I] instead.
inline LsqSolution solve_least_squares(const LsqSystem& sys, double rel_tol = 1e-10,
                                       double ridge = 0.0) {
  detail::check_system(sys);
  require(rel_tol > 0.0 && rel_tol < 1.0, Err::ConfigInvalid, "rel_tol must lie in (0,1)");

  const auto t0 = std::chrono::steady_clock::now();
  const lapack_int m0 = static_cast<lapack_int>(sys.rows());
  const lapack_int p = static_cast<lapack_int>(sys.cols());
  const lapack_int m = ridge > 0.0 ? m0 + p : m0;

  // dgelsd destroys its inputs; work on copies, padded for the min-norm output.
  Matrix a(m, p);
  a.topRows(m0) = sys.design;
  if (ridge > 0.0) {
    a.bottomRows(p).setZero();
    a.bottomRows(p).diagonal().setConstant(std::sqrt(ridge));
  }
  Vector b = Vector::Zero(std::max<lapack_int>(m, p));
  b.head(m0) = sys.rhs;

  std::vector<double> sv(std::min(m, p));
  lapack_int rank = 0;
  const lapack_int info =
      LAPACKE_dgelsd(LAPACK_COL_MAJOR, m, p, 1, a.data(), m, b.data(),
                     static_cast<lapack_int>(b.size()), sv.data(), rel_tol, &rank);
  require(info == 0, Err::FactorizationFailure,
          "dgelsd failed with info=" + std::to_string(info));

  LsqSolution sol;
  sol.coefficients = b.head(p);
  sol.residual_norm = (sys.design * sol.coefficients - sys.rhs).norm();
  sol.effective_rank = rank;
  sol.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

/// ||pred - ref||_2 / ||ref||_2
inline double relative_l2_error(const Eigen::Ref<const Vector>& pred,
                                const Eigen::Ref<const Vector>& ref) {
  require(pred.size() == ref.size(), Err::LengthMismatch, "prediction/reference length mismatch");
  require(pred.size() >= 1, Err::LengthMismatch, "empty vectors");
  const double denom = ref.norm();
  require(denom > 0.0, Err::ZeroReference, "reference has zero norm");
  return (pred - ref).norm() / denom;
}

// --- normal-equations fast path ----------------------------------------------
//
// For tall systems (M >> P) assembling A^T A directly avoids materializing the
// design matrix. The Gram matrix is accumulated by the training code; this
// solver factors it. Truncation semantics differ from the SVD route: Cholesky
// with escalating diagonal jitter, falling back to a truncated eigendecomposition
// if the matrix is numerically indefinite.

struct GramSystem {
  Matrix gram;       // P x P, symmetric
  Vector rhs;        // P, A^T b
  double rhs_sq = 0.0;  // ||b||^2, kept for residual estimates
  Eigen::Index rows_used = 0;
};

/// Largest eigenvalue via a fixed number of power iterations (deterministic
/// start vector); used to translate a singular-value cutoff into a ridge.
inline double estimate_max_eigenvalue(const Matrix& sym) {
  Vector v = Vector::Ones(sym.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 12; ++it) {
    Vector w = sym.selfadjointView<Eigen::Lower>() * v;
    lambda = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
  }
  return lambda;
}

inline LsqSolution solve_gram(GramSystem& gs, double rel_tol = 1e-10, double ridge = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  const lapack_int p = static_cast<lapack_int>(gs.gram.rows());
  require(p >= 1 && gs.rhs.size() == p, Err::EmptySystem, "empty or mismatched Gram system");

  const double trace = gs.gram.trace();
  // The dense route truncates singular values below rel_tol * sigma_max; the
  // equivalent spectral scale on the Gram matrix is rel_tol^2 * lambda_max,
  // applied as a ridge.
  double jitter = ridge > 0.0
                      ? ridge
                      : rel_tol * rel_tol * estimate_max_eigenvalue(gs.gram);

  LsqSolution sol;
  sol.effective_rank = p;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Matrix g = gs.gram;
    if (jitter > 0.0) g.diagonal().array() += jitter;
    Vector x = gs.rhs;
    const lapack_int info =
        LAPACKE_dposv(LAPACK_COL_MAJOR, 'L', p, 1, g.data(), p, x.data(), p);
    if (info == 0) {
      sol.coefficients = std::move(x);
      sol.solve_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return sol;
    }
    jitter = std::max(jitter * 1e4, 1e-13 * trace / static_cast<double>(p));
  }

  // Indefinite even with jitter: truncated eigendecomposition, min-norm.
  Matrix g = gs.gram;
  Vector evals(p);
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', p, g.data(), p, evals.data());
  require(info == 0, Err::FactorizationFailure, "dsyevd failed on Gram matrix");
  const double cutoff = evals(p - 1) * rel_tol * rel_tol;
  Vector proj = g.transpose() * gs.rhs;
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (evals(i) > cutoff && evals(i) > 0.0) {
      proj(i) /= evals(i);
      ++kept;
    } else {
      proj(i) = 0.0;
    }
  }
  sol.coefficients = g * proj;
  sol.effective_rank = kept;
  sol.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace rdo
