#include "rdo/features.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rdo;

TEST_CASE("uniform weights stay in range and reproduce from the seed", "[features]") {
  const Matrix w = init_uniform_weights(2, 3, 0.5, 42);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    CHECK(w(i) > -0.5);
    CHECK(w(i) < 0.5);
  }
  CHECK(w == init_uniform_weights(2, 3, 0.5, 42));
  CHECK(w != init_uniform_weights(2, 3, 0.5, 43));
  CHECK_THROWS_MATCHES(init_uniform_weights(2, 3, 0.0, 1), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Err::NonPositiveRange; }));
}

TEST_CASE("uniform weight moments match U(-r, r)", "[features]") {
  const double r = 0.5;
  const Matrix w = init_uniform_weights(200, 101, r, 1234);
  const Eigen::Index n = 10000;
  double mean = 0.0, sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = w(i % w.rows(), i / w.rows());
    mean += v;
    sq += v * v;
  }
  mean /= n;
  sq /= n;
  const double sigma = r / std::sqrt(3.0);  // std of U(-r, r)
  CHECK(std::abs(mean) < 3.0 * sigma / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sq - mean * mean - r * r / 3.0) < 0.1 * r * r / 3.0);
}

TEST_CASE("hypercube bias anchors the hyperplane inside the box", "[features]") {
  SECTION("one-row hand case") {
    Matrix w(1, 2);
    w << 1.0, 0.0;
    const BiasInit b = init_bias_hypercube(w, Hypercube::unit(2), 99);
    CHECK(b.bias(0) == Catch::Approx(-b.anchors(0, 0)));
    CHECK(b.anchors(0, 0) > 0.0);
    CHECK(b.anchors(0, 0) < 1.0);
  }
  SECTION("zero weight row forces zero bias") {
    Matrix w = Matrix::Zero(3, 2);
    w(1, 0) = 0.7;
    const BiasInit b = init_bias_hypercube(w, Hypercube::unit(2), 5);
    CHECK(b.bias(0) == 0.0);
    CHECK(b.bias(2) == 0.0);
  }
  SECTION("anchor satisfies the hyperplane equation") {
    const Matrix w = init_uniform_weights(120, 2, 2.0, 7);
    const BiasInit b = init_bias_hypercube(w, Hypercube::unit(2), 8);
    for (Eigen::Index n = 0; n < 120; ++n) {
      const double res = w.row(n).dot(b.anchors.row(n)) + b.bias(n);
      CHECK(std::abs(res) <= 1e-14);
    }
  }
  SECTION("dimension mismatch") {
    CHECK_THROWS_MATCHES(init_bias_hypercube(Matrix::Ones(2, 3), Hypercube::unit(2), 1), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Err::DimensionMismatch; }));
  }
}

TEST_CASE("feature evaluation", "[features]") {
  SECTION("zero layer gives tanh(0) = 0") {
    RandomLayer layer{Matrix::Zero(4, 2), Vector::Zero(4), Activation::Tanh};
    CHECK(eval_features(layer, Vector{{0.3, -0.2}}).isZero());
  }
  SECTION("identity activation with identity weights passes through") {
    RandomLayer layer{Matrix::Identity(3, 3), Vector::Zero(3), Activation::Identity};
    const Vector x{{0.1, -2.0, 5.0}};
    CHECK(eval_features(layer, x) == x);
  }
  SECTION("matches a scalar-loop reference") {
    LayerInit init;
    init.width = 17;
    init.in_dim = 5;
    init.weight_range = 1.5;
    init.weight_seed = 2;
    init.bias_seed = 3;
    init.bias_cube = Hypercube::unit(5);
    const RandomLayer layer = make_random_layer(init);
    Rng rng(4);
    Vector x(5);
    for (int d = 0; d < 5; ++d) x(d) = rng.uniform(-1.0, 1.0);
    const Vector got = eval_features(layer, x);
    for (Eigen::Index n = 0; n < 17; ++n) {
      double z = layer.biases(n);
      for (int d = 0; d < 5; ++d) z += layer.weights(n, d) * x(d);
      CHECK(std::abs(got(n) - std::tanh(z)) <= 1e-15);
    }
  }
  SECTION("repeated calls are bit-identical") {
    LayerInit init;
    init.width = 6;
    init.in_dim = 2;
    init.weight_seed = 10;
    init.bias_seed = 11;
    const RandomLayer layer = make_random_layer(init);
    const Vector x{{0.4, 0.6}};
    CHECK(eval_features(layer, x) == eval_features(layer, x));
  }
}

TEST_CASE("analytic feature derivatives", "[features]") {
  SECTION("at a pre-activation zero the gradient is the weight row") {
    Matrix w(1, 2);
    w << 0.8, -1.2;
    const Vector x{{0.5, 0.25}};
    RandomLayer layer{w, Vector{{-w.row(0).dot(x)}}, Activation::Tanh};
    const FeatureJet jet = eval_feature_derivatives(layer, x, 2);
    CHECK(jet.values(0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(jet.gradients.row(0) == w.row(0));  // 1 - tanh(0)^2 = 1 exactly
    CHECK(jet.hessians[0].isZero(1e-15));
  }
  SECTION("scalar calculus spot check at z = 1") {
    RandomLayer layer{Matrix::Ones(1, 1), Vector::Zero(1), Activation::Tanh};
    const FeatureJet jet = eval_feature_derivatives(layer, Vector{{1.0}}, 2);
    CHECK(jet.values(0) == Catch::Approx(0.7615941559557649));
    CHECK(jet.hessians[0](0, 0) == Catch::Approx(-0.6397000084492246).epsilon(1e-12));
  }
  SECTION("matches central differences") {
    LayerInit init;
    init.width = 9;
    init.in_dim = 3;
    init.weight_range = 2.0;
    init.weight_seed = 31;
    init.bias_seed = 32;
    init.bias_cube = Hypercube::unit(3);
    const RandomLayer layer = make_random_layer(init);
    Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
      Vector x(3);
      for (int d = 0; d < 3; ++d) x(d) = rng.uniform();
      const FeatureJet jet = eval_feature_derivatives(layer, x, 2);
      for (Eigen::Index n = 0; n < 9; ++n) {
        auto fn = [&](const Vector& p) { return eval_features(layer, p)(n); };
        const Vector fd_g = oracles::fd_gradient(fn, x);
        const Matrix fd_h = oracles::fd_hessian(fn, x);
        CHECK((jet.gradients.row(n).transpose() - fd_g).norm() <=
              1e-6 * std::max(1.0, fd_g.norm()));
        CHECK((jet.hessians[n] - fd_h).norm() <= 1e-4 * std::max(1.0, fd_h.norm()));
      }
    }
  }
  SECTION("identity activation derivatives are supported") {
    RandomLayer layer{Matrix::Ones(2, 2), Vector::Zero(2), Activation::Identity};
    const FeatureJet jet = eval_feature_derivatives(layer, Vector{{0.1, 0.2}}, 2);
    CHECK(jet.gradients == layer.weights);
    CHECK(jet.hessians[0].isZero());
  }
}

TEST_CASE("partition hyperplane density", "[features]") {
  Matrix w(1, 2);
  w << 1.0, 0.0;  // hyperplane x1 = 0.5
  const Vector b{{-0.5}};

  Matrix q1(1, 2);
  q1 << 0.5, 0.2;
  CHECK(hyperplane_density(w, b, q1, 0.6)(0) == 1.0);

  Matrix q2(1, 2);
  q2 << 1.5, 0.0;
  CHECK(hyperplane_density(w, b, q2, 0.5)(0) == 0.0);

  SECTION("matches brute force on random planes") {
    const Matrix rw = init_uniform_weights(50, 2, 3.0, 61);
    const BiasInit rb = init_bias_hypercube(rw, Hypercube::unit(2), 62);
    Rng rng(63);
    Matrix pts(100, 2);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = rng.uniform();
    const Vector got = hyperplane_density(rw, rb.bias, pts, 0.2);
    for (Eigen::Index p = 0; p < 100; ++p) {
      int hits = 0;
      for (Eigen::Index i = 0; i < 50; ++i) {
        const double d = std::abs(rw.row(i).dot(pts.row(p)) + rb.bias(i)) / rw.row(i).norm();
        if (d < 0.2) ++hits;
      }
      CHECK(got(p) == static_cast<double>(hits) / 50.0);
    }
  }
  SECTION("monotone in tau") {
    const Matrix rw = init_uniform_weights(30, 2, 3.0, 71);
    const BiasInit rb = init_bias_hypercube(rw, Hypercube::unit(2), 72);
    Matrix pt(1, 2);
    pt << 0.3, 0.8;
    double prev = 0.0;
    for (double tau : {0.01, 0.05, 0.1, 0.3, 1.0, 5.0}) {
      const double d = hyperplane_density(rw, rb.bias, pt, tau)(0);
      CHECK(d >= prev);
      prev = d;
    }
    CHECK(prev == 1.0);
  }
  SECTION("zero weight row is rejected") {
    CHECK_THROWS_MATCHES(hyperplane_density(Matrix::Zero(1, 2), Vector::Zero(1), q1, 0.5), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Err::ZeroWeightRow; }));
  }
}
