#pragma once

#include "rdo/common.hpp"
#include "rdo/features.hpp"
#include "rdo/fields.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

namespace rdo {

// --- periodic feature expansion ----------------------------------------------

/// Fourier expansion of one periodic coordinate: {cos(h w x), sin(h w x)} for
/// h = 1..H. The coordinate is reduced modulo the period first, so x and
/// x + T map to bit-identical features.
inline Vector periodic_embed_coord(double x, double omega, int harmonics) {
  require(omega > 0.0 && harmonics >= 1, Err::ConfigInvalid, "omega > 0 and H >= 1 required");
  const double period = 2.0 * M_PI / omega;
  const double reduced = x - std::floor(x / period) * period;
  Vector out(2 * harmonics);
  for (int h = 1; h <= harmonics; ++h) {
    out(2 * (h - 1)) = std::cos(h * omega * reduced);
    out(2 * (h - 1) + 1) = std::sin(h * omega * reduced);
  }
  return out;
}

/// Expansion of selected coordinates of a point; non-periodic coordinates are
/// appended unchanged after the expanded block.
struct PeriodicEmbedding {
  double omega = 2.0 * M_PI;     // radians per unit of the periodic coordinate
  int harmonics = 1;
  std::vector<int> periodic_dims;  // ascending raw-dimension indices
  int raw_dim = 0;

  int embedded_dim() const {
    return static_cast<int>(periodic_dims.size()) * 2 * harmonics +
           (raw_dim - static_cast<int>(periodic_dims.size()));
  }

  bool is_periodic(int d) const {
    for (int pd : periodic_dims)
      if (pd == d) return true;
    return false;
  }

  Vector embed(const Eigen::Ref<const Vector>& y) const {
    require(y.size() == raw_dim, Err::DimensionMismatch, "embedding input dimension mismatch");
    Vector z(embedded_dim());
    Eigen::Index at = 0;
    for (int d : periodic_dims) {
      z.segment(at, 2 * harmonics) = periodic_embed_coord(y(d), omega, harmonics);
      at += 2 * harmonics;
    }
    for (int d = 0; d < raw_dim; ++d)
      if (!is_periodic(d)) z(at++) = y(d);
    return z;
  }

  // Each embedded coordinate depends on exactly one raw coordinate; the jet
  // carries that source index and the first two derivatives w.r.t. it.
  struct Jet {
    Vector z;
    std::vector<int> src;
    Vector dz;
    Vector d2z;
  };

  Jet jet(const Eigen::Ref<const Vector>& y) const {
    require(y.size() == raw_dim, Err::DimensionMismatch, "embedding input dimension mismatch");
    Jet out;
    out.z.resize(embedded_dim());
    out.dz.resize(embedded_dim());
    out.d2z.resize(embedded_dim());
    out.src.resize(embedded_dim());
    const double period = 2.0 * M_PI / omega;
    Eigen::Index at = 0;
    for (int d : periodic_dims) {
      const double reduced = y(d) - std::floor(y(d) / period) * period;
      for (int h = 1; h <= harmonics; ++h) {
        const double w = h * omega;
        const double c = std::cos(w * reduced), s = std::sin(w * reduced);
        out.z(at) = c;
        out.dz(at) = -w * s;
        out.d2z(at) = -w * w * c;
        out.src[at] = d;
        ++at;
        out.z(at) = s;
        out.dz(at) = w * c;
        out.d2z(at) = -w * w * s;
        out.src[at] = d;
        ++at;
      }
    }
    for (int d = 0; d < raw_dim; ++d) {
      if (is_periodic(d)) continue;
      out.z(at) = y(d);
      out.dz(at) = 1.0;
      out.d2z(at) = 0.0;
      out.src[at] = d;
      ++at;
    }
    return out;
  }
};

// --- constraint wrapper --------------------------------------------------------

enum class ConstraintKind { None, Dirichlet };

/// Dirichlet surrogate u = c * G + g; c vanishes on the boundary, g carries
/// the boundary data (null means homogeneous). When the input of the operator
/// is itself a domain, per_domain is set and the constraint field is derived
/// from each realization's geometry instead of a fixed c.
struct ConstraintWrapper {
  ConstraintKind kind = ConstraintKind::None;
  bool per_domain = false;
  std::shared_ptr<const ScalarField> c;
  std::shared_ptr<const ScalarField> g;

  double c_value(const Eigen::Ref<const Vector>& y) const {
    if (kind == ConstraintKind::None) return 1.0;
    require(c != nullptr, Err::ConfigInvalid, "constraint field not resolved");
    return c->value(y);
  }
  double g_value(const Eigen::Ref<const Vector>& y) const {
    return (kind == ConstraintKind::None || !g) ? 0.0 : g->value(y);
  }

  /// Copy of this wrapper with the constraint field bound to one domain.
  ConstraintWrapper bind_domain(const DomainSpec& domain) const {
    ConstraintWrapper out = *this;
    out.c = std::make_shared<DomainConstraintField>(domain);
    out.per_domain = false;
    return out;
  }
};

inline ConstraintWrapper dirichlet_wrapper(std::shared_ptr<const ScalarField> c,
                                           std::shared_ptr<const ScalarField> g = nullptr) {
  require(c != nullptr, Err::ConfigInvalid, "dirichlet wrapper needs a constraint field");
  ConstraintWrapper cw;
  cw.kind = ConstraintKind::Dirichlet;
  cw.c = std::move(c);
  cw.g = std::move(g);
  return cw;
}

inline ConstraintWrapper domain_dirichlet_wrapper(std::shared_ptr<const ScalarField> g = nullptr) {
  ConstraintWrapper cw;
  cw.kind = ConstraintKind::Dirichlet;
  cw.per_domain = true;
  cw.g = std::move(g);
  return cw;
}

// --- the operator model --------------------------------------------------------

/// Randomized DeepONet: fixed random branch and trunk layers, one trainable
/// coefficient matrix alpha (p x k) applied bilinearly, optional periodic
/// feature expansion on the trunk input and optional Dirichlet wrapping.
struct RannDeepOnet {
  RandomLayer branch;  // in: m sensor values, out: k
  RandomLayer trunk;   // in: raw or embedded coordinates, out: p
  Matrix alpha;        // p x k; empty until trained
  ConstraintWrapper constraint;
  std::optional<PeriodicEmbedding> embedding;
  std::uint64_t seed = 0;

  Eigen::Index sensor_dim() const { return branch.in_dim(); }
  Eigen::Index branch_width() const { return branch.width(); }
  Eigen::Index trunk_width() const { return trunk.width(); }
  Eigen::Index coord_dim() const {
    return embedding ? embedding->raw_dim : trunk.in_dim();
  }
  bool trained() const { return alpha.size() > 0; }
};

struct ModelConfig {
  Eigen::Index sensor_dim = 0;
  Eigen::Index branch_width = 0;  // k
  Eigen::Index trunk_width = 0;   // p
  double branch_range = 1.0;      // r_b
  double trunk_range = 1.0;       // r_t
  std::uint64_t seed = 0;
  Hypercube branch_cube;  // box of sensor values
  Hypercube trunk_cube;   // box of (embedded) trunk inputs
  std::optional<PeriodicEmbedding> embedding;
  ConstraintWrapper constraint;
  bool branch_bias_hypercube = true;
};

inline RannDeepOnet build_model(const ModelConfig& cfg) {
  require(cfg.sensor_dim >= 1 && cfg.branch_width >= 1 && cfg.trunk_width >= 1,
          Err::ConfigInvalid, "model dimensions must be positive");
  RannDeepOnet model;
  model.seed = cfg.seed;

  LayerInit branch;
  branch.width = cfg.branch_width;
  branch.in_dim = cfg.sensor_dim;
  branch.weight_range = cfg.branch_range;
  branch.weight_seed = derive_seed(cfg.seed, 1);
  branch.bias_seed = derive_seed(cfg.seed, 2);
  if (cfg.branch_bias_hypercube) branch.bias_cube = cfg.branch_cube;
  model.branch = make_random_layer(branch);

  const Eigen::Index trunk_in =
      cfg.embedding ? cfg.embedding->embedded_dim() : cfg.trunk_cube.dim();
  LayerInit trunk;
  trunk.width = cfg.trunk_width;
  trunk.in_dim = trunk_in;
  trunk.weight_range = cfg.trunk_range;
  trunk.weight_seed = derive_seed(cfg.seed, 3);
  trunk.bias_seed = derive_seed(cfg.seed, 4);
  trunk.bias_cube = cfg.trunk_cube;
  model.trunk = make_random_layer(trunk);

  model.embedding = cfg.embedding;
  model.constraint = cfg.constraint;
  return model;
}

inline Vector branch_features(const RannDeepOnet& model, const Eigen::Ref<const Vector>& f) {
  return eval_features(model.branch, f);
}

inline Vector trunk_features(const RannDeepOnet& model, const Eigen::Ref<const Vector>& y) {
  if (model.embedding) return eval_features(model.trunk, model.embedding->embed(y));
  return eval_features(model.trunk, y);
}

/// Trunk basis values with derivatives in RAW coordinates, chain-ruled through
/// the periodic embedding when one is configured.
struct TrunkJet {
  Vector values;                // p
  Matrix gradients;             // p x raw_dim
  std::vector<Matrix> hessians; // p entries of raw_dim x raw_dim (order 2 only)
};

inline TrunkJet trunk_features_derivatives(const RannDeepOnet& model,
                                           const Eigen::Ref<const Vector>& y, int order) {
  require(order == 1 || order == 2, Err::UnsupportedOrder, "trunk derivatives support order <= 2");
  const Eigen::Index p = model.trunk_width();
  const Eigen::Index d = model.coord_dim();

  if (!model.embedding) {
    FeatureJet fj = eval_feature_derivatives(model.trunk, y, order);
    return TrunkJet{std::move(fj.values), std::move(fj.gradients), std::move(fj.hessians)};
  }

  const PeriodicEmbedding::Jet ej = model.embedding->jet(y);
  const FeatureJet fj = eval_feature_derivatives(model.trunk, ej.z, order);
  const Eigen::Index ed = ej.z.size();

  TrunkJet out;
  out.values = fj.values;
  out.gradients = Matrix::Zero(p, d);
  for (Eigen::Index n = 0; n < p; ++n)
    for (Eigen::Index c = 0; c < ed; ++c)
      out.gradients(n, ej.src[c]) += fj.gradients(n, c) * ej.dz(c);

  if (order == 2) {
    out.hessians.resize(p);
    for (Eigen::Index n = 0; n < p; ++n) {
      Matrix h = Matrix::Zero(d, d);
      const Matrix& hz = fj.hessians[n];
      for (Eigen::Index c = 0; c < ed; ++c) {
        const int a = ej.src[c];
        for (Eigen::Index e = 0; e < ed; ++e)
          h(a, ej.src[e]) += hz(c, e) * ej.dz(c) * ej.dz(e);
        h(a, a) += fj.gradients(n, c) * ej.d2z(c);
      }
      out.hessians[n] = std::move(h);
    }
  }
  return out;
}

/// c(y) * t(y)^T alpha h(f) + g(y); plain bilinear form when no wrapper is set.
/// The wrapper argument lets callers substitute a per-realization constraint
/// (domains-as-input case) without rebuilding the model.
inline double evaluate(const RannDeepOnet& model, const Eigen::Ref<const Vector>& f_sensors,
                       const Eigen::Ref<const Vector>& y, const ConstraintWrapper* wrapper = nullptr) {
  require(model.trained(), Err::Untrained, "model has no trained coefficients");
  const ConstraintWrapper& cw = wrapper ? *wrapper : model.constraint;
  const Vector h = branch_features(model, f_sensors);
  const Vector t = trunk_features(model, y);
  const double core = t.dot(model.alpha * h);
  return cw.c_value(y) * core + cw.g_value(y);
}

inline Vector evaluate_batch(const RannDeepOnet& model, const Eigen::Ref<const Vector>& f_sensors,
                             const Eigen::Ref<const Matrix>& points,
                             const ConstraintWrapper* wrapper = nullptr) {
  require(model.trained(), Err::Untrained, "model has no trained coefficients");
  const ConstraintWrapper& cw = wrapper ? *wrapper : model.constraint;
  const Vector h = branch_features(model, f_sensors);
  const Vector w = model.alpha * h;  // p
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vector y = points.row(i);
    out(i) = cw.c_value(y) * trunk_features(model, y).dot(w) + cw.g_value(y);
  }
  return out;
}

}  // namespace rdo
