#pragma once

// Test-only reference computations, kept independent of the library paths
// they are used to check.

#include "rdo/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <functional>

namespace oracles {

using rdo::Matrix;
using rdo::Vector;

/// Minimum-norm least squares via normal equations + eigendecomposition.
/// Deliberately a different route than the production SVD solver. Two steps
/// of iterative refinement recover the accuracy the squared condition number
/// of the Gram matrix would otherwise cost.
inline Vector pinv_solve(const Matrix& a, const Vector& b, double rel_tol) {
  const Matrix gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector evals = eig.eigenvalues();
  const Matrix evecs = eig.eigenvectors();
  const double cutoff = evals(evals.size() - 1) * rel_tol * rel_tol;
  auto apply_pinv = [&](const Vector& rhs) {
    Vector proj = evecs.transpose() * (a.transpose() * rhs);
    for (Eigen::Index i = 0; i < proj.size(); ++i)
      proj(i) = (evals(i) > cutoff && evals(i) > 0.0) ? proj(i) / evals(i) : 0.0;
    return Vector(evecs * proj);
  };
  Vector x = apply_pinv(b);
  for (int step = 0; step < 2; ++step) x += apply_pinv(b - a * x);
  return x;
}

/// Random matrix with prescribed condition number (log-uniform singular values).
inline Matrix random_conditioned(Eigen::Index m, Eigen::Index p, double cond, rdo::Rng& rng) {
  Matrix ga(m, p), gb(p, p);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < p; ++j) ga(i, j) = rng.normal();
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) gb(i, j) = rng.normal();
  const Matrix qa = Eigen::HouseholderQR<Matrix>(ga).householderQ() * Matrix::Identity(m, p);
  const Matrix qb = Eigen::HouseholderQR<Matrix>(gb).householderQ();
  Vector sv(p);
  for (Eigen::Index i = 0; i < p; ++i)
    sv(i) = std::pow(cond, -static_cast<double>(i) / std::max<Eigen::Index>(p - 1, 1));
  return qa * sv.asDiagonal() * qb.transpose();
}

/// Central-difference gradient of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    Vector xp = x, xm = x;
    xp(d) += h;
    xm(d) -= h;
    g(d) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Central-difference Hessian of a scalar function.
inline Matrix fd_hessian(const std::function<double(const Vector&)>& f, const Vector& x,
                         double h = 1e-4) {
  const Eigen::Index n = x.size();
  Matrix hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Vector xpp = x, xpm = x, xmp = x, xmm = x;
      xpp(i) += h; xpp(j) += h;
      xpm(i) += h; xpm(j) -= h;
      xmp(i) -= h; xmp(j) += h;
      xmm(i) -= h; xmm(j) -= h;
      hess(i, j) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
    }
  }
  return hess;
}

/// Point-in-polygon by ray casting; independent of the edge-sign route.
inline bool ray_cast_inside(const std::vector<std::array<double, 2>>& verts, double x, double y) {
  bool inside = false;
  const std::size_t n = verts.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const bool crosses = (verts[i][1] > y) != (verts[j][1] > y);
    if (crosses) {
      const double xint = verts[j][0] +
                          (y - verts[j][1]) * (verts[i][0] - verts[j][0]) /
                              (verts[i][1] - verts[j][1]);
      if (x < xint) inside = !inside;
    }
  }
  return inside;
}

}  // namespace oracles
