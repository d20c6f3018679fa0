#pragma once

#include "rdo/common.hpp"
#include "rdo/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <mutex>
#include <vector>

namespace rdo {

namespace detail {

// FFTW planning is not thread-safe; execution on distinct plans is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// u_t + u u_x = nu u_xx on the periodic unit interval, Fourier pseudo-spectral
/// with 2/3-rule dealiasing; classical RK4 on the advection term with the
/// diffusion handled exactly by an integrating factor. If the requested step
/// count violates the advective CFL bound the solver refines it (with a
/// warning) rather than failing. Output is the trigonometric interpolation of
/// the solution on a uniform out_nx x out_nt grid of [0,1] x [0,1].
class BurgersSpectralSolver {
public:
  BurgersSpectralSolver(int nx, double nu) : n_(nx), nu_(nu), nc_(nx / 2 + 1) {
    require(nx >= 32 && nx % 2 == 0, Err::ConfigInvalid, "need an even grid of at least 32");
    real_ = fftw_alloc_real(n_);
    spec_ = fftw_alloc_complex(nc_);
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(n_, real_, spec_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(n_, spec_, real_, FFTW_ESTIMATE);
  }

  ~BurgersSpectralSolver() {
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  BurgersSpectralSolver(const BurgersSpectralSolver&) = delete;
  BurgersSpectralSolver& operator=(const BurgersSpectralSolver&) = delete;

  GridSolution solve(const Eigen::Ref<const Vector>& u0, int nt, int out_nx, int out_nt) {
    require(u0.size() == n_, Err::DimensionMismatch, "initial values must live on the x grid");
    using C = std::complex<double>;
    const int kc = n_ / 3;  // 2/3-rule cutoff

    // spectrum of the initial condition
    for (int i = 0; i < n_; ++i) real_[i] = u0(i);
    fftw_execute(fwd_);
    std::vector<C> v(nc_);
    for (int k = 0; k < nc_; ++k) {
      v[k] = C(spec_[k][0], spec_[k][1]) / static_cast<double>(n_);
      if (k > kc) v[k] = 0.0;
    }

    // advective CFL: dt |u| w_max <= 1.5 keeps RK4 stable on the imaginary axis
    const double umax = u0.cwiseAbs().maxCoeff();
    const int out_steps = out_nt - 1;
    int steps = std::max(nt - 1, out_steps);
    const int cfl_steps =
        static_cast<int>(std::ceil(1.2 * umax * M_PI * static_cast<double>(n_) / 1.5));
    if (cfl_steps > steps) {
      std::fprintf(stderr, "[burgers] CFL violation: refining %d -> %d steps\n", steps,
                   cfl_steps);
      steps = cfl_steps;
    }
    steps = ((steps + out_steps - 1) / out_steps) * out_steps;  // land on output times
    const double dt = 1.0 / steps;

    std::vector<double> efull(nc_), ehalf(nc_);
    for (int k = 0; k < nc_; ++k) {
      const double w = 2.0 * M_PI * k;
      efull[k] = std::exp(-nu_ * w * w * dt);
      ehalf[k] = std::exp(-nu_ * w * w * dt * 0.5);
    }

    GridSolution out;
    out.axis0 = linspace(0.0, 1.0, out_nx);
    out.axis1 = linspace(0.0, 1.0, out_nt);
    out.values.resize(static_cast<Eigen::Index>(out_nx) * out_nt);
    store_snapshot(v, out, 0);

    std::vector<C> k1(nc_), k2(nc_), k3(nc_), k4(nc_), tmp(nc_);
    const int snap_every = steps / out_steps;
    for (int step = 1; step <= steps; ++step) {
      nonlinear(v, k1);
      for (int k = 0; k < nc_; ++k) tmp[k] = ehalf[k] * (v[k] + 0.5 * dt * k1[k]);
      nonlinear(tmp, k2);
      for (int k = 0; k < nc_; ++k) tmp[k] = ehalf[k] * v[k] + 0.5 * dt * k2[k];
      nonlinear(tmp, k3);
      for (int k = 0; k < nc_; ++k) tmp[k] = efull[k] * v[k] + dt * ehalf[k] * k3[k];
      nonlinear(tmp, k4);
      for (int k = 0; k < nc_; ++k)
        v[k] = efull[k] * v[k] +
               dt / 6.0 * (efull[k] * k1[k] + 2.0 * ehalf[k] * (k2[k] + k3[k]) + k4[k]);
      if (step % snap_every == 0) store_snapshot(v, out, step / snap_every);
    }
    return out;
  }

private:
  // N(u) = -(u^2/2)_x in spectral space, dealiased on entry and exit
  void nonlinear(const std::vector<std::complex<double>>& vh,
                 std::vector<std::complex<double>>& out) {
    const int kc = n_ / 3;
    for (int k = 0; k < nc_; ++k) {
      const std::complex<double> c = k <= kc ? vh[k] : std::complex<double>(0.0, 0.0);
      spec_[k][0] = c.real();
      spec_[k][1] = c.imag();
    }
    fftw_execute(bwd_);  // spectrum is stored normalized, so this yields u itself
    for (int i = 0; i < n_; ++i) {
      const double u = real_[i];
      real_[i] = 0.5 * u * u;
    }
    fftw_execute(fwd_);
    for (int k = 0; k < nc_; ++k) {
      if (k > kc) {
        out[k] = 0.0;
        continue;
      }
      const double w = 2.0 * M_PI * k;
      const std::complex<double> sq(spec_[k][0] / n_, spec_[k][1] / n_);
      out[k] = std::complex<double>(0.0, -w) * sq;
    }
  }

  // trigonometric interpolation of the dealiased spectrum onto the output x grid
  void store_snapshot(const std::vector<std::complex<double>>& vh, GridSolution& out,
                      int time_index) const {
    const int kc = n_ / 3;
    for (Eigen::Index ix = 0; ix < out.axis0.size(); ++ix) {
      const double x = out.axis0(ix) - std::floor(out.axis0(ix));
      double acc = vh[0].real();
      for (int k = 1; k <= kc; ++k) {
        const double ang = 2.0 * M_PI * k * x;
        acc += 2.0 * (vh[k].real() * std::cos(ang) - vh[k].imag() * std::sin(ang));
      }
      out.values(ix * out.axis1.size() + time_index) = acc;
    }
  }

  int n_;
  double nu_;
  int nc_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

inline GridSolution solve_burgers(const Eigen::Ref<const Vector>& u0_values, double nu, int nx,
                                  int nt, int out_nx = 101, int out_nt = 101) {
  BurgersSpectralSolver solver(nx, nu);
  return solver.solve(u0_values, nt, out_nx, out_nt);
}

}  // namespace rdo
