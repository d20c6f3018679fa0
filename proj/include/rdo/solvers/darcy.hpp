#pragma once

#include "rdo/common.hpp"
#include "rdo/geometry.hpp"
#include "rdo/grid.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <limits>
#include <vector>

namespace rdo {

/// -laplace(u) = 1 on a parametric domain embedded in [0,2]^2, u = 0 on the
/// boundary. Shortley-Weller five-point finite differences on a grid_n^2
/// Cartesian grid: arms that cross the boundary are shortened to the exact
/// intersection (bisection on the signed inside function), so the Dirichlet
/// value is imposed on the true boundary rather than the nearest node.
/// Nodes outside the domain carry NaN.
inline GridSolution solve_darcy(const DomainSpec& domain, int grid_n) {
  require(grid_n >= 16, Err::ConfigInvalid, "grid must be at least 16 x 16");
  GridSolution sol;
  sol.axis0 = linspace(0.0, 2.0, grid_n);
  sol.axis1 = linspace(0.0, 2.0, grid_n);
  sol.values = Vector::Constant(static_cast<Eigen::Index>(grid_n) * grid_n,
                                std::numeric_limits<double>::quiet_NaN());
  const double h = 2.0 / (grid_n - 1);

  std::vector<Eigen::Index> index(static_cast<std::size_t>(grid_n) * grid_n, -1);
  std::vector<std::pair<int, int>> nodes;
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j)
      if (contains(domain, sol.axis0(i), sol.axis1(j))) {
        index[static_cast<std::size_t>(i) * grid_n + j] =
            static_cast<Eigen::Index>(nodes.size());
        nodes.emplace_back(i, j);
      }
  const Eigen::Index unknowns = static_cast<Eigen::Index>(nodes.size());
  require(unknowns >= 9, Err::DegenerateDomain, "domain covers too few grid nodes");

  // fraction of the arm from (x,y) toward (x+dx, y+dy) that stays inside
  const auto arm_fraction = [&](double x, double y, double dx, double dy) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (signed_inside(domain, x + mid * dx, y + mid * dy) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    return std::max(hi, 1e-6);  // guard against zero-length arms on the boundary
  };

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(unknowns) * 5);
  Vector rhs = Vector::Ones(unknowns);

  for (Eigen::Index row = 0; row < unknowns; ++row) {
    const auto [i, j] = nodes[row];
    const double x = sol.axis0(i), y = sol.axis1(j);
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    double frac[4];
    Eigen::Index nbr[4];
    for (int a = 0; a < 4; ++a) {
      const int ni = i + di[a], nj = j + dj[a];
      const bool inside = ni >= 0 && ni < grid_n && nj >= 0 && nj < grid_n &&
                          index[static_cast<std::size_t>(ni) * grid_n + nj] >= 0;
      if (inside) {
        frac[a] = 1.0;
        nbr[a] = index[static_cast<std::size_t>(ni) * grid_n + nj];
      } else {
        frac[a] = arm_fraction(x, y, di[a] * h, dj[a] * h);
        nbr[a] = -1;
      }
    }
    double diag = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
      const double a = frac[2 * axis], b = frac[2 * axis + 1];
      diag += 2.0 / (a * b * h * h);
      // boundary arms contribute u = 0, so only interior neighbors get entries
      if (nbr[2 * axis] >= 0)
        trips.emplace_back(row, nbr[2 * axis], -2.0 / (a * (a + b) * h * h));
      if (nbr[2 * axis + 1] >= 0)
        trips.emplace_back(row, nbr[2 * axis + 1], -2.0 / (b * (a + b) * h * h));
    }
    trips.emplace_back(row, row, diag);
  }

  Eigen::SparseMatrix<double> mat(unknowns, unknowns);
  mat.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(mat);
  require(lu.info() == Eigen::Success, Err::FactorizationFailure,
          "sparse factorization of the Shortley-Weller system failed");
  const Vector u = lu.solve(rhs);
  require(lu.info() == Eigen::Success, Err::FactorizationFailure,
          "sparse solve of the Shortley-Weller system failed");

  for (Eigen::Index row = 0; row < unknowns; ++row) {
    const auto [i, j] = nodes[row];
    sol.at(i, j) = u(row);
  }
  return sol;
}

}  // namespace rdo
