#pragma once

#include "rdo/common.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace rdo {

enum class Activation { Tanh, Identity };

/// Axis-aligned box [lower_0, upper_0] x ... x [lower_{d-1}, upper_{d-1}].
/// Used as the smallest hypercube containing the evaluation domain when
/// initializing biases.
struct Hypercube {
  Vector lower;
  Vector upper;

  Hypercube() = default;
  Hypercube(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    require(lower.size() == upper.size(), Err::DimensionMismatch, "hypercube bound sizes differ");
    for (Eigen::Index d = 0; d < lower.size(); ++d)
      require(lower(d) < upper(d), Err::ConfigInvalid, "hypercube has empty extent");
  }

  Eigen::Index dim() const { return lower.size(); }

  static Hypercube unit(Eigen::Index dim) {
    return Hypercube(Vector::Zero(dim), Vector::Ones(dim));
  }
};

/// Entries i.i.d. uniform on (-r, r), reproducible from the seed.
inline Matrix init_uniform_weights(Eigen::Index width, Eigen::Index in_dim, double r,
                                   std::uint64_t seed) {
  require(r > 0.0, Err::NonPositiveRange, "uniform weight range must be positive");
  require(width >= 1 && in_dim >= 1, Err::DimensionMismatch, "layer dimensions must be >= 1");
  Rng rng(seed);
  Matrix w(width, in_dim);
  for (Eigen::Index i = 0; i < width; ++i)
    for (Eigen::Index d = 0; d < in_dim; ++d) w(i, d) = rng.uniform(-r, r);
  return w;
}

struct BiasInit {
  Vector bias;
  Matrix anchors;  // width x in_dim; hyperplane i passes through anchors.row(i)
};

/// Bias choice that makes every hyperplane W[n,:] x + b[n] = 0 pass through a
/// uniformly drawn point of the hypercube: b = -(W .* B) 1 with B ~ U(lower, upper)
/// row-wise. The anchor matrix B is returned so the property stays assertable.
inline BiasInit init_bias_hypercube(const Eigen::Ref<const Matrix>& weights,
                                    const Hypercube& cube, std::uint64_t seed) {
  require(weights.cols() == cube.dim(), Err::DimensionMismatch,
          "weight columns do not match hypercube dimension");
  Rng rng(seed);
  BiasInit out;
  out.anchors.resize(weights.rows(), weights.cols());
  out.bias.resize(weights.rows());
  for (Eigen::Index n = 0; n < weights.rows(); ++n) {
    double acc = 0.0;
    for (Eigen::Index d = 0; d < weights.cols(); ++d) {
      const double anchor = rng.uniform(cube.lower(d), cube.upper(d));
      out.anchors(n, d) = anchor;
      acc += weights(n, d) * anchor;
    }
    out.bias(n) = -acc;
  }
  return out;
}

/// A fixed random affine map plus activation. Immutable after construction.
struct RandomLayer {
  Matrix weights;  // width x in_dim
  Vector biases;   // width
  Activation activation = Activation::Tanh;
  std::optional<Matrix> anchors;  // present for hypercube-initialized biases
  std::uint64_t weight_seed = 0;
  std::uint64_t bias_seed = 0;

  Eigen::Index width() const { return weights.rows(); }
  Eigen::Index in_dim() const { return weights.cols(); }
};

struct LayerInit {
  Eigen::Index width = 0;
  Eigen::Index in_dim = 0;
  double weight_range = 1.0;  // r in U(-r, r)
  Activation activation = Activation::Tanh;
  std::uint64_t weight_seed = 0;
  std::uint64_t bias_seed = 0;
  // hypercube bias strategy when set; plain U(-r, r) bias otherwise
  std::optional<Hypercube> bias_cube;
};

inline RandomLayer make_random_layer(const LayerInit& init) {
  RandomLayer layer;
  layer.weights = init_uniform_weights(init.width, init.in_dim, init.weight_range, init.weight_seed);
  layer.activation = init.activation;
  layer.weight_seed = init.weight_seed;
  layer.bias_seed = init.bias_seed;
  if (init.bias_cube) {
    BiasInit b = init_bias_hypercube(layer.weights, *init.bias_cube, init.bias_seed);
    layer.biases = std::move(b.bias);
    layer.anchors = std::move(b.anchors);
  } else {
    Rng rng(init.bias_seed);
    layer.biases.resize(init.width);
    for (Eigen::Index n = 0; n < init.width; ++n)
      layer.biases(n) = rng.uniform(-init.weight_range, init.weight_range);
  }
  return layer;
}

inline double activate(Activation a, double z) {
  return a == Activation::Tanh ? std::tanh(z) : z;
}

/// sigma(W x + b), element-wise.
inline Vector eval_features(const RandomLayer& layer, const Eigen::Ref<const Vector>& x) {
  require(x.size() == layer.in_dim(), Err::DimensionMismatch, "feature input dimension mismatch");
  Vector z = layer.weights * x + layer.biases;
  if (layer.activation == Activation::Tanh)
    for (Eigen::Index n = 0; n < z.size(); ++n) z(n) = std::tanh(z(n));
  return z;
}

/// Per-neuron value, gradient and (optionally) Hessian of the feature map.
/// tanh: h' = (1 - h^2) w_d, h'' = -2 h (1 - h^2) w_d w_e.
/// identity: gradient is the weight row, Hessian zero.
struct FeatureJet {
  Vector values;               // width
  Matrix gradients;            // width x in_dim
  std::vector<Matrix> hessians;  // width entries of in_dim x in_dim, empty if order < 2
};

inline FeatureJet eval_feature_derivatives(const RandomLayer& layer,
                                           const Eigen::Ref<const Vector>& x, int order) {
  require(order == 1 || order == 2, Err::UnsupportedOrder, "derivative order must be 1 or 2");
  require(x.size() == layer.in_dim(), Err::DimensionMismatch, "feature input dimension mismatch");

  FeatureJet jet;
  jet.values = layer.weights * x + layer.biases;
  jet.gradients.resize(layer.width(), layer.in_dim());
  if (order == 2) jet.hessians.resize(layer.width());

  for (Eigen::Index n = 0; n < layer.width(); ++n) {
    if (layer.activation == Activation::Identity) {
      jet.gradients.row(n) = layer.weights.row(n);
      if (order == 2) jet.hessians[n] = Matrix::Zero(layer.in_dim(), layer.in_dim());
      continue;
    }
    const double h = std::tanh(jet.values(n));
    jet.values(n) = h;
    const double dsig = 1.0 - h * h;
    jet.gradients.row(n) = dsig * layer.weights.row(n);
    if (order == 2)
      jet.hessians[n] =
          (-2.0 * h * dsig) * (layer.weights.row(n).transpose() * layer.weights.row(n));
  }
  return jet;
}

/// Partition hyperplane density: fraction of hyperplanes whose normal distance
/// to the query point is below tau.
inline Vector hyperplane_density(const Eigen::Ref<const Matrix>& weights,
                                 const Eigen::Ref<const Vector>& biases,
                                 const Eigen::Ref<const Matrix>& points, double tau) {
  require(tau > 0.0, Err::ConfigInvalid, "tau must be positive");
  require(weights.rows() == biases.size(), Err::DimensionMismatch, "weights/biases row mismatch");
  require(points.cols() == weights.cols(), Err::DimensionMismatch, "query dimension mismatch");

  Vector norms(weights.rows());
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    norms(i) = weights.row(i).norm();
    require(norms(i) > 0.0, Err::ZeroWeightRow, "hyperplane with zero weight row");
  }

  Vector density(points.rows());
  for (Eigen::Index q = 0; q < points.rows(); ++q) {
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < weights.rows(); ++i) {
      const double dist = std::abs(weights.row(i).dot(points.row(q)) + biases(i)) / norms(i);
      if (dist < tau) ++hits;
    }
    density(q) = static_cast<double>(hits) / static_cast<double>(weights.rows());
  }
  return density;
}

}  // namespace rdo
