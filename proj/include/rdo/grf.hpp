#pragma once

#include "rdo/common.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace rdo {

// --- RBF-kernel Gaussian random field -------------------------------------------

/// Draws from N(0, C) with C_ab = exp(-|x_a - x_b|^2 / (2 l^2)) on a fixed
/// point set. The covariance factor is computed once and reused across draws;
/// the diagonal jitter escalates until the factorization succeeds.
class RbfGrfSampler {
public:
  RbfGrfSampler(const Eigen::Ref<const Matrix>& points, double length_scale) {
    require(length_scale > 0.0, Err::NonPositiveRange, "length scale must be positive");
    const Eigen::Index m = points.rows();
    require(m >= 1, Err::ConfigInvalid, "need at least one sample point");
    Matrix cov(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b <= a; ++b) {
        const double d2 = (points.row(a) - points.row(b)).squaredNorm();
        cov(a, b) = cov(b, a) = std::exp(-d2 / (2.0 * length_scale * length_scale));
      }
    }
    double jitter = 1e-10 * cov.trace() / static_cast<double>(m);
    const double jitter_cap = 1e-4 * cov.trace() / static_cast<double>(m);
    while (true) {
      Matrix work = cov;
      work.diagonal().array() += jitter;
      Eigen::LLT<Matrix> llt(work);
      if (llt.info() == Eigen::Success) {
        chol_ = llt.matrixL();
        break;
      }
      jitter *= 10.0;
      require(jitter <= jitter_cap, Err::FactorizationFailure,
              "covariance factorization failed at maximum jitter");
    }
  }

  Vector draw(std::uint64_t seed) const {
    Rng rng(seed);
    Vector z(chol_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return chol_ * z;
  }

private:
  Matrix chol_;
};

inline Vector sample_grf_rbf(double length_scale, const Eigen::Ref<const Matrix>& points,
                             std::uint64_t seed) {
  return RbfGrfSampler(points, length_scale).draw(seed);
}

// --- periodic Riesz-kernel Gaussian random field ---------------------------------
//
// Spectral draw of mu ~ N(0, 625 (-Laplace + 25 I)^-4) on the unit circle:
// the cos/sin coefficient of integer mode k has variance
// 625 (4 pi^2 k^2 + 25)^-4. The field is a finite Fourier series and can be
// evaluated anywhere, which keeps sensor values and solver inputs consistent.

inline double riesz_mode_variance(int mode) {
  const double ev = 4.0 * M_PI * M_PI * static_cast<double>(mode) * mode + 25.0;
  return 625.0 / (ev * ev * ev * ev);
}

struct PeriodicFourierField {
  Vector cos_coef;  // index k = 0..K
  Vector sin_coef;  // sin_coef(0) unused (identically zero mode)

  int max_mode() const { return static_cast<int>(cos_coef.size()) - 1; }

  /// Direct series evaluation; the argument is reduced mod 1 first so x = 1
  /// reproduces x = 0 exactly.
  double eval(double x) const {
    const double xr = x - std::floor(x);
    double acc = cos_coef(0);
    for (int k = 1; k <= max_mode(); ++k) {
      const double ang = 2.0 * M_PI * k * xr;
      acc += cos_coef(k) * std::cos(ang) + sin_coef(k) * std::sin(ang);
    }
    return acc;
  }

  Vector eval_many(const Eigen::Ref<const Vector>& xs) const {
    Vector out(xs.size());
    for (Eigen::Index i = 0; i < xs.size(); ++i) out(i) = eval(xs(i));
    return out;
  }
};

/// Coefficient draw order is fixed: a_0, then (a_k, b_k) ascending in k.
inline PeriodicFourierField sample_riesz_field(int max_mode, std::uint64_t seed) {
  require(max_mode >= 1, Err::ConfigInvalid, "need at least one mode");
  Rng rng(seed);
  PeriodicFourierField f;
  f.cos_coef.resize(max_mode + 1);
  f.sin_coef = Vector::Zero(max_mode + 1);
  f.cos_coef(0) = std::sqrt(riesz_mode_variance(0)) * rng.normal();
  for (int k = 1; k <= max_mode; ++k) {
    const double sd = std::sqrt(riesz_mode_variance(k));
    f.cos_coef(k) = sd * rng.normal();
    f.sin_coef(k) = sd * rng.normal();
  }
  return f;
}

/// Field values on the uniform grid x_j = j / resolution, j = 0..resolution-1.
inline Vector sample_grf_periodic_riesz(int resolution, std::uint64_t seed) {
  require(resolution >= 8, Err::ConfigInvalid, "resolution must be at least 8");
  const PeriodicFourierField f = sample_riesz_field(resolution / 2, seed);
  Vector xs(resolution);
  for (int j = 0; j < resolution; ++j) xs(j) = static_cast<double>(j) / resolution;
  return f.eval_many(xs);
}

}  // namespace rdo
