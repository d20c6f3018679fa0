#pragma once

#include "rdo/common.hpp"

#include <cmath>

namespace rdo {

inline Vector linspace(double lo, double hi, Eigen::Index n) {
  require(n >= 2, Err::ConfigInvalid, "linspace needs at least 2 points");
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

/// Reference solution on a uniform 2-D tensor grid, row-major in the first
/// axis: value(i0, i1) = values[i0 * n1 + i1].
struct GridSolution {
  Vector axis0;  // e.g. x
  Vector axis1;  // e.g. t or y
  Vector values;

  Eigen::Index n0() const { return axis0.size(); }
  Eigen::Index n1() const { return axis1.size(); }

  double& at(Eigen::Index i0, Eigen::Index i1) { return values(i0 * n1() + i1); }
  double at(Eigen::Index i0, Eigen::Index i1) const { return values(i0 * n1() + i1); }

  void check() const {
    require(values.size() == n0() * n1(), Err::DimensionMismatch,
            "grid value count does not match axes");
  }

  /// Bilinear interpolation; exact at grid nodes. Non-finite corner values
  /// (outside-domain markers) enter as zero, the continuous extension of a
  /// field vanishing on the boundary.
  double interpolate(double x0, double x1) const {
    const auto locate = [](const Vector& ax, double v) {
      const double h = (ax(ax.size() - 1) - ax(0)) / static_cast<double>(ax.size() - 1);
      Eigen::Index cell = static_cast<Eigen::Index>(std::floor((v - ax(0)) / h));
      cell = std::max<Eigen::Index>(0, std::min(cell, ax.size() - 2));
      return std::pair<Eigen::Index, double>(cell, (v - ax(cell)) / h);
    };
    const auto [i, s] = locate(axis0, x0);
    const auto [j, t] = locate(axis1, x1);
    const auto v = [&](Eigen::Index a, Eigen::Index b) {
      const double w = at(a, b);
      return std::isfinite(w) ? w : 0.0;
    };
    return (1.0 - s) * (1.0 - t) * v(i, j) + s * (1.0 - t) * v(i + 1, j) +
           (1.0 - s) * t * v(i, j + 1) + s * t * v(i + 1, j + 1);
  }
};

}  // namespace rdo
