#pragma once

#include "rdo/common.hpp"
#include "rdo/grid.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace rdo {

/// u_t = D u_xx + kappa u^2 + f(x, t) on (0,1) x (0,1], zero initial and
/// Dirichlet data. Second-order central differences in space, Crank-Nicolson
/// in time with a Newton iteration on the quadratic reaction term
/// (tolerance 1e-10, at most 25 iterations). The source hook takes (x, t) so
/// manufactured-solution tests can drive time-dependent forcing; production
/// sources depend on x only.
inline GridSolution solve_diffusion_reaction_src(const std::function<double(double, double)>& source,
                                                 double diffusion, double reaction, int nx,
                                                 int nt) {
  require(nx >= 16 && nt >= 16, Err::ConfigInvalid, "grid must be at least 16 x 16");
  GridSolution sol;
  sol.axis0 = linspace(0.0, 1.0, nx);
  sol.axis1 = linspace(0.0, 1.0, nt);
  sol.values = Vector::Zero(static_cast<Eigen::Index>(nx) * nt);

  const double h = 1.0 / (nx - 1);
  const double dt = 1.0 / (nt - 1);
  const double r = diffusion / (h * h);
  const int ni = nx - 2;  // interior unknowns

  Vector u = Vector::Zero(nx);        // current time level
  Vector v(nx), fn(nx), fn1(nx);      // iterate and source levels
  std::vector<double> dl(ni), dd(ni), du(ni), rhs(ni);

  const auto second_diff = [&](const Vector& w, int i) {
    return r * (w(i - 1) - 2.0 * w(i) + w(i + 1));
  };

  for (int step = 1; step < nt; ++step) {
    const double t0 = sol.axis1(step - 1), t1 = sol.axis1(step);
    for (int i = 0; i < nx; ++i) {
      fn(i) = source(sol.axis0(i), t0);
      fn1(i) = source(sol.axis0(i), t1);
    }

    // explicit half of the trapezoidal update
    Vector expl(nx);
    for (int i = 1; i < nx - 1; ++i)
      expl(i) = u(i) + 0.5 * dt * (second_diff(u, i) + reaction * u(i) * u(i) + fn(i));

    v = u;  // warm start
    bool converged = false;
    for (int it = 0; it < 25; ++it) {
      // residual F(v) and tridiagonal Jacobian of the implicit half
      double fnorm = 0.0;
      for (int i = 1; i < nx - 1; ++i) {
        const double fi =
            v(i) - 0.5 * dt * (second_diff(v, i) + reaction * v(i) * v(i) + fn1(i)) - expl(i);
        rhs[i - 1] = -fi;
        fnorm = std::max(fnorm, std::abs(fi));
        dd[i - 1] = 1.0 + dt * r - dt * reaction * v(i);
        dl[i - 1] = -0.5 * dt * r;
        du[i - 1] = -0.5 * dt * r;
      }
      if (fnorm <= 1e-10) {
        converged = true;
        break;
      }
      // Thomas elimination
      for (int i = 1; i < ni; ++i) {
        const double w = dl[i] / dd[i - 1];
        dd[i] -= w * du[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      std::vector<double> delta(ni);
      delta[ni - 1] = rhs[ni - 1] / dd[ni - 1];
      for (int i = ni - 2; i >= 0; --i) delta[i] = (rhs[i] - du[i] * delta[i + 1]) / dd[i];
      for (int i = 1; i < nx - 1; ++i) v(i) += delta[i - 1];
    }
    require(converged, Err::NewtonDivergence, "Newton iteration failed to converge");

    u = v;
    u(0) = u(nx - 1) = 0.0;
    for (int i = 0; i < nx; ++i) sol.at(i, step) = u(i);
  }
  return sol;
}

/// Production entry point: the source is a field sampled on the x grid.
inline GridSolution solve_diffusion_reaction(const Eigen::Ref<const Vector>& f_on_grid,
                                             double diffusion, double reaction, int nx, int nt) {
  require(f_on_grid.size() == nx, Err::DimensionMismatch,
          "source samples must live on the x grid");
  return solve_diffusion_reaction_src(
      [&](double x, double) {
        const double pos = x * (nx - 1);
        const Eigen::Index i =
            std::min<Eigen::Index>(static_cast<Eigen::Index>(std::lround(pos)), nx - 1);
        return f_on_grid(i);
      },
      diffusion, reaction, nx, nt);
}

}  // namespace rdo
