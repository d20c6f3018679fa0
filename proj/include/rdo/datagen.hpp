#pragma once

#include "rdo/dataset.hpp"
#include "rdo/geometry.hpp"
#include "rdo/grf.hpp"
#include "rdo/solvers/burgers.hpp"
#include "rdo/solvers/darcy.hpp"
#include "rdo/solvers/diffusion_reaction.hpp"
#include "rdo/train.hpp"

#include <omp.h>

#include <string>

namespace rdo {

struct DatagenParams {
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  bool grid_colloc = false;  // test sets evaluate on the full reference grid

  // source-to-solution example
  Eigen::Index dr_m = 100;
  Eigen::Index dr_q = 100;
  int dr_nx = 100;
  int dr_nt = 100;
  double dr_length_scale = 0.2;
  double dr_diffusion = 0.01;
  double dr_reaction = 0.01;

  // initial-condition-to-solution example
  Eigen::Index bu_m = 101;
  int bu_nx = 256;
  int bu_nt = 1000;
  int bu_out = 101;
  double bu_nu = 0.01;
  Eigen::Index bu_q_init = 101;
  Eigen::Index bu_q_bound = 100;
  Eigen::Index bu_q_interior = 2500;

  // domain-to-solution example
  Eigen::Index da_boundary_m = 100;
  Eigen::Index da_q = 1000;
  int da_grid = 121;       // reference grid for training data
  int da_eval_grid = 201;  // evaluation grid for test sets
};

namespace detail {

inline std::uint64_t real_seed(std::uint64_t master, std::uint64_t purpose, Eigen::Index i) {
  return derive_seed(derive_seed(master, purpose), static_cast<std::uint64_t>(i));
}

}  // namespace detail

/// Source term f(x) (RBF-kernel GRF, length scale 0.2) to solution of the
/// diffusion-reaction equation. Sensors coincide with the solver x grid; u
/// values at collocation points come from bilinear interpolation on the
/// reference mesh.
inline Dataset build_dataset_dr(const DatagenParams& prm) {
  require(prm.n >= 1, Err::ConfigInvalid, "need at least one realization");
  require(prm.dr_m == prm.dr_nx, Err::ConfigInvalid,
          "sensor count must match the reference x grid");
  Dataset data;
  data.meta.example = "dr";
  data.meta.seed = prm.seed;
  data.meta.grid_nx = prm.dr_nx;
  data.meta.grid_nt = prm.dr_nt;
  data.sensors = linspace(0.0, 1.0, prm.dr_m);

  const RbfGrfSampler sampler(data.sensors, prm.dr_length_scale);
  const Eigen::Index q =
      prm.grid_colloc ? static_cast<Eigen::Index>(prm.dr_nx) * prm.dr_nt : prm.dr_q;
  data.realizations.resize(prm.n);

#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < prm.n; ++i) {
    Realization& r = data.realizations[i];
    r.input = sampler.draw(detail::real_seed(prm.seed, 1, i));
    const GridSolution sol = solve_diffusion_reaction(r.input, prm.dr_diffusion,
                                                      prm.dr_reaction, prm.dr_nx, prm.dr_nt);
    r.colloc.resize(q, 2);
    r.u.resize(q);
    if (prm.grid_colloc) {
      Eigen::Index at = 0;
      for (Eigen::Index a = 0; a < sol.n0(); ++a)
        for (Eigen::Index b = 0; b < sol.n1(); ++b) {
          r.colloc(at, 0) = sol.axis0(a);
          r.colloc(at, 1) = sol.axis1(b);
          r.u(at) = sol.at(a, b);
          ++at;
        }
    } else {
      Rng rng(detail::real_seed(prm.seed, 2, i));
      for (Eigen::Index j = 0; j < q; ++j) {
        r.colloc(j, 0) = rng.uniform();
        r.colloc(j, 1) = rng.uniform();
        r.u(j) = sol.interpolate(r.colloc(j, 0), r.colloc(j, 1));
      }
    }
  }
  return data;
}

/// Initial condition (periodic Riesz-kernel GRF) to solution of the viscous
/// Burgers equation. Training collocation is stratified: every initial-line
/// node, spatial-boundary nodes at random times, and random interior nodes of
/// the output grid; labels are exact grid values.
inline Dataset build_dataset_burgers(const DatagenParams& prm) {
  require(prm.n >= 1, Err::ConfigInvalid, "need at least one realization");
  Dataset data;
  data.meta.example = "burgers";
  data.meta.seed = prm.seed;
  data.meta.grid_nx = prm.bu_out;
  data.meta.grid_nt = prm.bu_out;
  data.sensors = linspace(0.0, 1.0, prm.bu_m);

  const Eigen::Index out = prm.bu_out;
  Eigen::Index q;
  if (prm.grid_colloc) {
    q = out * out;
  } else {
    require(prm.bu_q_init == out, Err::ConfigInvalid,
            "initial stratum must cover the initial-line nodes");
    q = prm.bu_q_init + prm.bu_q_bound + prm.bu_q_interior;
    data.meta.strata_initial = prm.bu_q_init;
    data.meta.strata_boundary = prm.bu_q_bound;
    data.meta.strata_interior = prm.bu_q_interior;
  }

  Vector solver_grid(prm.bu_nx);
  for (int j = 0; j < prm.bu_nx; ++j) solver_grid(j) = static_cast<double>(j) / prm.bu_nx;
  data.realizations.resize(prm.n);

#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < prm.n; ++i) {
    Realization& r = data.realizations[i];
    const PeriodicFourierField field =
        sample_riesz_field(prm.bu_nx / 2, detail::real_seed(prm.seed, 11, i));
    r.input = field.eval_many(data.sensors.col(0));
    const GridSolution sol =
        solve_burgers(field.eval_many(solver_grid), prm.bu_nu, prm.bu_nx, prm.bu_nt, out, out);

    r.colloc.resize(q, 2);
    r.u.resize(q);
    if (prm.grid_colloc) {
      Eigen::Index at = 0;
      for (Eigen::Index a = 0; a < out; ++a)
        for (Eigen::Index b = 0; b < out; ++b) {
          r.colloc(at, 0) = sol.axis0(a);
          r.colloc(at, 1) = sol.axis1(b);
          r.u(at) = sol.at(a, b);
          ++at;
        }
    } else {
      Rng rng(detail::real_seed(prm.seed, 12, i));
      r.boundary.assign(q, 0);
      Eigen::Index at = 0;
      for (Eigen::Index a = 0; a < out; ++a) {  // the full initial line
        r.colloc(at, 0) = sol.axis0(a);
        r.colloc(at, 1) = 0.0;
        r.u(at) = sol.at(a, 0);
        r.boundary[at] = 1;
        ++at;
      }
      const Eigen::Index half = prm.bu_q_bound / 2;
      for (Eigen::Index side = 0; side < 2; ++side) {
        const Eigen::Index ix = side == 0 ? 0 : out - 1;
        const auto times = rdo::detail::draw_without_replacement(
            static_cast<std::size_t>(out - 1), static_cast<std::size_t>(
                side == 0 ? half : prm.bu_q_bound - half), rng);
        for (std::size_t tj : times) {
          r.colloc(at, 0) = sol.axis0(ix);
          r.colloc(at, 1) = sol.axis1(static_cast<Eigen::Index>(tj) + 1);
          r.u(at) = sol.at(ix, static_cast<Eigen::Index>(tj) + 1);
          r.boundary[at] = 1;
          ++at;
        }
      }
      const Eigen::Index inner_x = out - 2, inner_t = out - 1;
      const auto cells = rdo::detail::draw_without_replacement(
          static_cast<std::size_t>(inner_x) * inner_t,
          static_cast<std::size_t>(prm.bu_q_interior), rng);
      require(static_cast<Eigen::Index>(cells.size()) == prm.bu_q_interior, Err::ConfigInvalid,
              "interior stratum exceeds the available grid nodes");
      for (std::size_t c : cells) {
        const Eigen::Index a = 1 + static_cast<Eigen::Index>(c) / inner_t;
        const Eigen::Index b = 1 + static_cast<Eigen::Index>(c) % inner_t;
        r.colloc(at, 0) = sol.axis0(a);
        r.colloc(at, 1) = sol.axis1(b);
        r.u(at) = sol.at(a, b);
        ++at;
      }
    }
  }
  return data;
}

/// Domain (flattened boundary polyline) to pressure of the unit-source flow
/// problem. Shapes cycle ellipse, rectangle, triangle so every third
/// realization shares a family; collocation points outside the domain carry
/// u = 0 and a cleared mask flag.
inline Dataset build_dataset_darcy(const DatagenParams& prm) {
  require(prm.n >= 1, Err::ConfigInvalid, "need at least one realization");
  Dataset data;
  data.meta.example = "darcy";
  data.meta.seed = prm.seed;
  data.meta.grid_nx = prm.grid_colloc ? prm.da_eval_grid : prm.da_grid;
  data.meta.grid_nt = data.meta.grid_nx;
  data.sensors.resize(prm.da_boundary_m, 1);
  for (Eigen::Index i = 0; i < prm.da_boundary_m; ++i)
    data.sensors(i, 0) = static_cast<double>(i) / prm.da_boundary_m;

  const int grid_n = prm.grid_colloc ? prm.da_eval_grid : prm.da_grid;
  const Eigen::Index q =
      prm.grid_colloc ? static_cast<Eigen::Index>(grid_n) * grid_n : prm.da_q;
  data.realizations.resize(prm.n);

#pragma omp parallel for schedule(dynamic, 2)
  for (Eigen::Index i = 0; i < prm.n; ++i) {
    Realization& r = data.realizations[i];
    const Shape shape = static_cast<Shape>(i % 3);
    const DomainSpec domain = sample_domain(shape, detail::real_seed(prm.seed, 21, i));
    r.domain = domain;

    const Matrix bp = boundary_points(domain, static_cast<int>(prm.da_boundary_m));
    r.input.resize(2 * prm.da_boundary_m);
    for (Eigen::Index b = 0; b < prm.da_boundary_m; ++b) {
      r.input(2 * b) = bp(b, 0);
      r.input(2 * b + 1) = bp(b, 1);
    }

    const GridSolution sol = solve_darcy(domain, grid_n);
    r.colloc.resize(q, 2);
    r.u.resize(q);
    r.mask.assign(q, 1);
    if (prm.grid_colloc) {
      Eigen::Index at = 0;
      for (Eigen::Index a = 0; a < sol.n0(); ++a)
        for (Eigen::Index b = 0; b < sol.n1(); ++b) {
          r.colloc(at, 0) = sol.axis0(a);
          r.colloc(at, 1) = sol.axis1(b);
          const double v = sol.at(a, b);
          r.u(at) = std::isfinite(v) ? v : 0.0;
          r.mask[at] = contains(domain, sol.axis0(a), sol.axis1(b)) ? 1 : 0;
          ++at;
        }
    } else {
      Rng rng(detail::real_seed(prm.seed, 22, i));
      for (Eigen::Index j = 0; j < q; ++j) {
        r.colloc(j, 0) = rng.uniform(0.0, 2.0);
        r.colloc(j, 1) = rng.uniform(0.0, 2.0);
        const bool inside = contains(domain, r.colloc(j, 0), r.colloc(j, 1));
        r.mask[j] = inside ? 1 : 0;
        r.u(j) = inside ? sol.interpolate(r.colloc(j, 0), r.colloc(j, 1)) : 0.0;
      }
    }
  }
  return data;
}

inline Dataset build_dataset(const std::string& example, const DatagenParams& prm) {
  if (example == "dr") return build_dataset_dr(prm);
  if (example == "burgers") return build_dataset_burgers(prm);
  if (example == "darcy") return build_dataset_darcy(prm);
  fail(Err::ConfigInvalid, "unknown example id: " + example);
}

}  // namespace rdo
