#pragma once

#include "rdo/common.hpp"
#include "rdo/dataset.hpp"
#include "rdo/linalg.hpp"
#include "rdo/model.hpp"

#include <cblas.h>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

namespace rdo {

/// Differential operators usable in physics rows. Only operators linear in u
/// admit one-shot least-squares training; the nonlinear benchmark operators
/// are named so they can be rejected explicitly.
struct LinearPdeOperator {
  enum class Kind { NegativeDivKGrad, DiffusionReaction, Burgers };
  Kind kind = Kind::NegativeDivKGrad;
  double coefficient = 1.0;  // permeability K (constant field)

  bool is_linear() const { return kind == Kind::NegativeDivKGrad; }
};

enum class TrainMode { DataDriven, PhysicsInformed };
enum class SolverPath { Svd, NormalEquations };

/// Source term f(y) of realization n, the right-hand side of physics rows.
/// An empty function means the constant source f = 1.
using SourceFn = std::function<double(Eigen::Index, const Eigen::Ref<const Vector>&)>;

struct TrainConfig {
  TrainMode mode = TrainMode::DataDriven;
  Eigen::Index sample_budget = 0;  // 0 = use every (realization, point) pair
  double boundary_weight = 1.0;    // lambda; boundary rows are scaled by sqrt(lambda)
  double rel_tol = 1e-10;
  double ridge = 0.0;
  std::uint64_t seed = 0;
  SolverPath path = SolverPath::Svd;
  bool stratified = false;  // preserve the dataset's collocation strata ratios
  LinearPdeOperator pde;
  SourceFn source;
};

struct TrainReport {
  double residual_norm = 0.0;
  double train_seconds = 0.0;
  double solve_seconds = 0.0;
  Eigen::Index rows_used = 0;
  Eigen::Index effective_rank = 0;
};

// --- pair sampling --------------------------------------------------------------

using PairList = std::vector<std::pair<Eigen::Index, Eigen::Index>>;  // (realization, point)

namespace detail {

// Partial Fisher-Yates draw of `count` linear indices from [0, pool).
inline std::vector<std::size_t> draw_without_replacement(std::size_t pool, std::size_t count,
                                                         Rng& rng) {
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  count = std::min(count, pool);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.next_u64() % (pool - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace detail

/// Uniform sampling without replacement over all (realization, point) pairs;
/// the full pair set when the budget covers it. With `stratified`, the budget
/// is split across the dataset's collocation strata in proportion to their
/// sizes and drawn independently within each stratum.
inline PairList sample_pairs(const Dataset& data, Eigen::Index budget, std::uint64_t seed,
                             bool stratified = false) {
  const Eigen::Index n = data.size();
  const Eigen::Index q = data.colloc_count();
  const std::size_t pool = static_cast<std::size_t>(n) * q;
  if (budget <= 0 || static_cast<std::size_t>(budget) >= pool) {
    PairList all;
    all.reserve(pool);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < q; ++j) all.emplace_back(i, j);
    return all;
  }

  Rng rng(derive_seed(seed, 0x9a9));
  PairList pairs;
  pairs.reserve(budget);

  if (!stratified || !data.stratified()) {
    for (std::size_t l : detail::draw_without_replacement(pool, budget, rng))
      pairs.emplace_back(static_cast<Eigen::Index>(l / q), static_cast<Eigen::Index>(l % q));
  } else {
    const Eigen::Index sizes[3] = {data.meta.strata_initial, data.meta.strata_boundary,
                                   data.meta.strata_interior};
    require(sizes[0] + sizes[1] + sizes[2] == q, Err::ConfigInvalid,
            "strata sizes do not cover the collocation set");
    Eigen::Index lo = 0, assigned = 0;
    for (int s = 0; s < 3; ++s) {
      Eigen::Index want = s < 2 ? (budget * sizes[s]) / q : budget - assigned;
      want = std::min<Eigen::Index>(want, n * sizes[s]);
      assigned += want;
      for (std::size_t l : detail::draw_without_replacement(
               static_cast<std::size_t>(n) * sizes[s], static_cast<std::size_t>(want), rng)) {
        const Eigen::Index i = static_cast<Eigen::Index>(l) / sizes[s];
        const Eigen::Index j = lo + static_cast<Eigen::Index>(l) % sizes[s];
        pairs.emplace_back(i, j);
      }
      lo += sizes[s];
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

// --- row factors -----------------------------------------------------------------
//
// Every assembled row factors as kron(v(y), h_n): the h_n side is shared by all
// rows of realization n, the v side is either c(y) t(y) (data rows) or the PDE
// operator applied to c * t_i (physics rows). Keeping rows grouped by
// realization preserves that structure for the Gram fast path.

struct RealizationRows {
  Eigen::Index realization = 0;
  Matrix trunk_rows;  // rows x p
  Vector rhs;         // rows
  Vector h;           // k branch features
};

struct RowGroups {
  std::vector<RealizationRows> groups;
  Eigen::Index p = 0, k = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols() const { return p * k; }
};

namespace detail {

inline ConstraintWrapper resolve_wrapper(const RannDeepOnet& model, const Realization& r) {
  if (model.constraint.kind == ConstraintKind::Dirichlet && model.constraint.per_domain) {
    require(r.domain.has_value(), Err::ConfigInvalid,
            "per-domain constraint needs realization domains");
    return model.constraint.bind_domain(*r.domain);
  }
  return model.constraint;
}

inline void fill_data_group(const RannDeepOnet& model, const Dataset& data,
                            const PairList& pairs, std::size_t lo, std::size_t hi,
                            RealizationRows& out) {
  const Realization& r = data.realizations[out.realization];
  const ConstraintWrapper cw = resolve_wrapper(model, r);
  const Eigen::Index p = model.trunk_width();

  Matrix rows(static_cast<Eigen::Index>(hi - lo), p);
  Vector rhs(static_cast<Eigen::Index>(hi - lo));
  Eigen::Index kept = 0;
  for (std::size_t a = lo; a < hi; ++a) {
    const Eigen::Index j = pairs[a].second;
    const Vector y = r.colloc.row(j);
    const double c = cw.c_value(y);
    if (c == 0.0) continue;  // identically 0 = 0, wasted budget
    rows.row(kept) = c * trunk_features(model, y).transpose();
    rhs(kept) = r.u(j) - cw.g_value(y);
    ++kept;
  }
  out.trunk_rows = rows.topRows(kept);
  out.rhs = rhs.head(kept);
}

inline void fill_physics_group(const RannDeepOnet& model, const Dataset& data,
                               const TrainConfig& cfg, const PairList& pairs, std::size_t lo,
                               std::size_t hi, RealizationRows& out) {
  const Realization& r = data.realizations[out.realization];
  const ConstraintWrapper cw = resolve_wrapper(model, r);
  const double kdiff = cfg.pde.coefficient;
  const Eigen::Index p = model.trunk_width();
  const double sqrt_lambda = std::sqrt(cfg.boundary_weight);

  Matrix rows(static_cast<Eigen::Index>(hi - lo), p);
  Vector rhs(static_cast<Eigen::Index>(hi - lo));
  Eigen::Index kept = 0;
  for (std::size_t a = lo; a < hi; ++a) {
    const Eigen::Index j = pairs[a].second;
    const Vector y = r.colloc.row(j);
    const bool on_boundary = !r.boundary.empty() && r.boundary[j] != 0;

    if (on_boundary) {
      // boundary rows only exist without the hard constraint; with it the
      // boundary is exact and carries no information
      if (cw.kind == ConstraintKind::Dirichlet) continue;
      rows.row(kept) = sqrt_lambda * trunk_features(model, y).transpose();
      rhs(kept) = sqrt_lambda * r.u(j);
      ++kept;
      continue;
    }

    if (!r.mask.empty() && r.mask[j] == 0) continue;  // outside the domain
    double cval = 1.0;
    Vector cgrad;
    double clap = 0.0;
    if (cw.kind == ConstraintKind::Dirichlet) {
      cval = cw.c->value(y);
      if (cval <= 0.0) continue;  // residual rows need the smooth interior branch
      cgrad = cw.c->gradient(y);
      clap = cw.c->hessian(y).trace();
    }

    const TrunkJet jet = trunk_features_derivatives(model, y, 2);
    for (Eigen::Index i = 0; i < p; ++i) {
      double lap_ct = clap * jet.values(i) + cval * jet.hessians[i].trace();
      if (cgrad.size() > 0) lap_ct += 2.0 * cgrad.dot(jet.gradients.row(i));
      rows(kept, i) = -kdiff * lap_ct;
    }
    double f = cfg.source ? cfg.source(out.realization, y) : 1.0;
    if (cw.kind == ConstraintKind::Dirichlet && cw.g)
      f += kdiff * cw.g->hessian(y).trace();  // move N(g) to the right-hand side
    rhs(kept) = f;
    ++kept;
  }
  out.trunk_rows = rows.topRows(kept);
  out.rhs = rhs.head(kept);
}

}  // namespace detail

inline RowGroups build_row_groups(const RannDeepOnet& model, const Dataset& data,
                                  const TrainConfig& cfg, const PairList& pairs) {
  if (cfg.mode == TrainMode::DataDriven)
    require(data.has_solution_values(), Err::MissingSolutionValues,
            "data-driven training needs solution values");
  else
    require(cfg.pde.is_linear(), Err::NonlinearPde,
            "physics rows are only defined for operators linear in u");

  RowGroups rg;
  rg.p = model.trunk_width();
  rg.k = model.branch_width();

  // pairs are sorted by realization; carve out the group ranges
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t start = 0;
  for (std::size_t a = 1; a <= pairs.size(); ++a) {
    if (a == pairs.size() || pairs[a].first != pairs[start].first) {
      ranges.emplace_back(start, a);
      start = a;
    }
  }
  rg.groups.resize(ranges.size());

#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t gi = 0; gi < ranges.size(); ++gi) {
    const auto [lo, hi] = ranges[gi];
    RealizationRows& out = rg.groups[gi];
    out.realization = pairs[lo].first;
    out.h = branch_features(model, data.realizations[out.realization].input);
    if (cfg.mode == TrainMode::DataDriven)
      detail::fill_data_group(model, data, pairs, lo, hi, out);
    else
      detail::fill_physics_group(model, data, cfg, pairs, lo, hi, out);
  }

  for (const auto& g : rg.groups) rg.rows += g.trunk_rows.rows();
  return rg;
}

/// Dense design matrix: A[row, i*k + j] = v_i(y) h_j, rhs as assembled.
inline LsqSystem to_dense_system(const RowGroups& rg) {
  require(rg.rows > 0, Err::EmptySystem, "no rows survived assembly");
  LsqSystem sys;
  sys.design.resize(rg.rows, rg.cols());
  sys.rhs.resize(rg.rows);
  Eigen::Index at = 0;
  for (const auto& g : rg.groups) {
    for (Eigen::Index row = 0; row < g.trunk_rows.rows(); ++row) {
      for (Eigen::Index i = 0; i < rg.p; ++i)
        sys.design.row(at).segment(i * rg.k, rg.k) = g.trunk_rows(row, i) * g.h.transpose();
      sys.rhs(at) = g.rhs(row);
      ++at;
    }
  }
  return sys;
}

/// Gram accumulation exploiting the Kronecker row structure: all rows of one
/// realization share h, so A^T A = sum_n kron(S_n, h_n h_n^T) with
/// S_n = V_n^T V_n. The Kronecker sum is evaluated as one GEMM over packed
/// (i1 <= i2) trunk pairs, then scattered into the (i*k + j) layout.
inline GramSystem accumulate_gram(const RowGroups& rg) {
  require(rg.rows > 0, Err::EmptySystem, "no rows survived assembly");
  const Eigen::Index p = rg.p, k = rg.k, P = rg.cols();
  const Eigen::Index npairs = p * (p + 1) / 2;
  const Eigen::Index ngroups = static_cast<Eigen::Index>(rg.groups.size());

  GramSystem gs;
  gs.gram = Matrix::Zero(P, P);
  gs.rhs = Vector::Zero(P);
  gs.rows_used = rg.rows;

  // packed pair list (i1 <= i2)
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pair_of(npairs);
  {
    Eigen::Index q = 0;
    for (Eigen::Index i2 = 0; i2 < p; ++i2)
      for (Eigen::Index i1 = 0; i1 <= i2; ++i1) pair_of[q++] = {i1, i2};
  }

  // realization chunks bound the stacked-memory footprint
  const Eigen::Index chunk_bytes = 1'200'000'000;
  const Eigen::Index per_real = (k * k + npairs) * 8;
  const Eigen::Index cn = std::max<Eigen::Index>(8, std::min(ngroups, chunk_bytes / per_real));
  const Eigen::Index cp =
      std::max<Eigen::Index>(64, std::min(npairs, 300'000'000 / (8 * k * k)));

  Matrix hstack(k * k, cn), spairs(npairs, cn), part(k * k, cp);
  Eigen::Map<Matrix> rhs_mat(gs.rhs.data(), k, p);

  for (Eigen::Index g0 = 0; g0 < ngroups; g0 += cn) {
    const Eigen::Index gc = std::min(cn, ngroups - g0);

#pragma omp parallel for schedule(dynamic, 4)
    for (Eigen::Index gi = 0; gi < gc; ++gi) {
      const RealizationRows& g = rg.groups[g0 + gi];
      const Matrix s = g.trunk_rows.transpose() * g.trunk_rows;  // p x p
      for (Eigen::Index q = 0; q < npairs; ++q)
        spairs(q, gi) = s(pair_of[q].first, pair_of[q].second);
      Eigen::Map<Matrix>(hstack.col(gi).data(), k, k) = g.h * g.h.transpose();
    }

    for (Eigen::Index gi = 0; gi < gc; ++gi) {
      const RealizationRows& g = rg.groups[g0 + gi];
      const Vector w = g.trunk_rows.transpose() * g.rhs;  // p
      rhs_mat += g.h * w.transpose();
      gs.rhs_sq += g.rhs.squaredNorm();
    }

    for (Eigen::Index q0 = 0; q0 < npairs; q0 += cp) {
      const Eigen::Index qc = std::min(cp, npairs - q0);
      cblas_dgemm(CblasColMajor, CblasNoTrans, CblasTrans, static_cast<int>(k * k),
                  static_cast<int>(qc), static_cast<int>(gc), 1.0, hstack.data(),
                  static_cast<int>(k * k), spairs.data() + q0, static_cast<int>(npairs), 0.0,
                  part.data(), static_cast<int>(k * k));
      for (Eigen::Index q = 0; q < qc; ++q) {
        const auto [i1, i2] = pair_of[q0 + q];
        const Eigen::Map<const Matrix> block(part.col(q).data(), k, k);
        gs.gram.block(i1 * k, i2 * k, k, k) += block;
        if (i1 != i2) gs.gram.block(i2 * k, i1 * k, k, k) += block;
      }
    }
  }
  return gs;
}

/// Exact ||A x - b|| for a flattened coefficient vector, streamed through the
/// row groups without materializing A.
inline double streaming_residual(const RowGroups& rg, const Eigen::Ref<const Vector>& coeffs) {
  require(coeffs.size() == rg.cols(), Err::DimensionMismatch, "coefficient length mismatch");
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      alpha(coeffs.data(), rg.p, rg.k);
  double acc = 0.0;
  for (const auto& g : rg.groups) {
    const Vector w = alpha * g.h;  // p
    acc += (g.trunk_rows * w - g.rhs).squaredNorm();
  }
  return std::sqrt(acc);
}

// --- public assembly entry points ---------------------------------------------

inline LsqSystem assemble_data_rows(const RannDeepOnet& model, const Dataset& data,
                                    Eigen::Index sample_budget, std::uint64_t rng_seed,
                                    bool stratified = false) {
  TrainConfig cfg;
  cfg.mode = TrainMode::DataDriven;
  const PairList pairs = sample_pairs(data, sample_budget, rng_seed, stratified);
  return to_dense_system(build_row_groups(model, data, cfg, pairs));
}

inline LsqSystem assemble_physics_rows(const RannDeepOnet& model, const Dataset& data,
                                       const LinearPdeOperator& pde, Eigen::Index sample_budget,
                                       double lambda, std::uint64_t rng_seed,
                                       const SourceFn& source = {}) {
  TrainConfig cfg;
  cfg.mode = TrainMode::PhysicsInformed;
  cfg.pde = pde;
  cfg.boundary_weight = lambda;
  cfg.source = source;
  const PairList pairs = sample_pairs(data, sample_budget, rng_seed);
  return to_dense_system(build_row_groups(model, data, cfg, pairs));
}

/// Assemble per the configured mode, solve, write alpha into the model.
inline TrainReport train(RannDeepOnet& model, const Dataset& data, const TrainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const PairList pairs =
      sample_pairs(data, cfg.sample_budget, cfg.seed, cfg.stratified && data.stratified());
  const RowGroups rg = build_row_groups(model, data, cfg, pairs);

  if (rg.rows < rg.cols())
    std::fprintf(stderr, "[train] warning: %lld rows for %lld coefficients; system is rank-deficient\n",
                 static_cast<long long>(rg.rows), static_cast<long long>(rg.cols()));

  LsqSolution sol;
  if (cfg.path == SolverPath::Svd) {
    const LsqSystem sys = to_dense_system(rg);
    sol = solve_least_squares(sys, cfg.rel_tol, cfg.ridge);
  } else {
    GramSystem gs = accumulate_gram(rg);
    sol = solve_gram(gs, cfg.rel_tol, cfg.ridge);
    sol.residual_norm = streaming_residual(rg, sol.coefficients);
  }

  model.alpha = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(sol.coefficients.data(), rg.p,
                                                                 rg.k);
  TrainReport report;
  report.residual_norm = sol.residual_norm;
  report.solve_seconds = sol.solve_seconds;
  report.rows_used = rg.rows;
  report.effective_rank = sol.effective_rank;
  report.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace rdo
