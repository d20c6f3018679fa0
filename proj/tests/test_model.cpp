#include "rdo/model.hpp"

#include "oracles.hpp"
#include "rdo/geometry.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rdo;

namespace {

RannDeepOnet small_model(std::uint64_t seed, ConstraintWrapper cw = {},
                         std::optional<PeriodicEmbedding> embed = std::nullopt,
                         Eigen::Index coord_dim = 2) {
  ModelConfig cfg;
  cfg.sensor_dim = 8;
  cfg.branch_width = 5;
  cfg.trunk_width = 6;
  cfg.branch_range = 0.5;
  cfg.trunk_range = 2.0;
  cfg.seed = seed;
  cfg.branch_cube = Hypercube(Vector::Constant(8, -1.0), Vector::Constant(8, 1.0));
  if (embed) {
    Vector lo(embed->embedded_dim()), hi(embed->embedded_dim());
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      lo(i) = i < 2 * embed->harmonics * static_cast<Eigen::Index>(embed->periodic_dims.size())
                  ? -1.0
                  : 0.0;
      hi(i) = 1.0;
    }
    cfg.trunk_cube = Hypercube(lo, hi);
  } else {
    cfg.trunk_cube = Hypercube::unit(coord_dim);
  }
  cfg.embedding = embed;
  cfg.constraint = std::move(cw);
  return build_model(cfg);
}

Matrix random_alpha(Eigen::Index p, Eigen::Index k, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(p, k);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
  return a;
}

}  // namespace

TEST_CASE("periodic coordinate expansion", "[model]") {
  const Vector at0 = periodic_embed_coord(0.0, 2.0 * M_PI, 1);
  CHECK(at0(0) == 1.0);
  CHECK(at0(1) == 0.0);

  // x and x + period give bit-identical features whenever the shift is exact
  // in floating point (dyadic coordinates; in particular the interval ends)
  for (double x : {0.0, 0.25, 0.375, 0.5}) {
    const Vector a = periodic_embed_coord(x, 2.0 * M_PI, 3);
    const Vector b = periodic_embed_coord(x + 1.0, 2.0 * M_PI, 3);
    CHECK(a == b);
  }
  const Vector c1 = periodic_embed_coord(0.37, 2.0 * M_PI, 3);
  const Vector c2 = periodic_embed_coord(1.37, 2.0 * M_PI, 3);
  CHECK((c1 - c2).norm() < 1e-13);

  const Vector q = periodic_embed_coord(0.25, 2.0 * M_PI, 1);
  CHECK(std::abs(q(0)) <= 1e-15);  // cos(pi/2)
  CHECK(q(1) == Catch::Approx(1.0));
}

TEST_CASE("branch features", "[model]") {
  const RannDeepOnet model = small_model(77);
  SECTION("zero weights reduce to tanh of the bias") {
    RannDeepOnet m = model;
    m.branch.weights.setZero();
    const Vector h = branch_features(m, Vector::Zero(8));
    for (Eigen::Index n = 0; n < h.size(); ++n)
      CHECK(h(n) == Catch::Approx(std::tanh(m.branch.biases(n))));
  }
  SECTION("shape and scalar oracle") {
    Rng rng(78);
    Vector f(8);
    for (Eigen::Index i = 0; i < 8; ++i) f(i) = rng.uniform(-1.0, 1.0);
    const Vector h = branch_features(model, f);
    REQUIRE(h.size() == 5);
    for (Eigen::Index n = 0; n < 5; ++n) {
      double z = model.branch.biases(n);
      for (Eigen::Index d = 0; d < 8; ++d) z += model.branch.weights(n, d) * f(d);
      CHECK(std::abs(h(n) - std::tanh(z)) <= 1e-15);
    }
  }
}

TEST_CASE("trunk derivatives reduce to the layer jet without embedding", "[model]") {
  const RannDeepOnet model = small_model(79);
  const Vector y{{0.3, 0.6}};
  const TrunkJet tj = trunk_features_derivatives(model, y, 2);
  const FeatureJet fj = eval_feature_derivatives(model.trunk, y, 2);
  CHECK(tj.values == fj.values);
  CHECK(tj.gradients == fj.gradients);
  for (Eigen::Index n = 0; n < 6; ++n) CHECK(tj.hessians[n] == fj.hessians[n]);
}

TEST_CASE("trunk derivatives with periodic embedding match finite differences", "[model]") {
  PeriodicEmbedding embed;
  embed.omega = 2.0 * M_PI;
  embed.harmonics = 1;
  embed.periodic_dims = {0};
  embed.raw_dim = 2;
  const RannDeepOnet model = small_model(80, {}, embed);

  Rng rng(81);
  for (int trial = 0; trial < 25; ++trial) {
    const Vector y{{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)}};
    const TrunkJet tj = trunk_features_derivatives(model, y, 2);
    for (Eigen::Index n = 0; n < model.trunk_width(); ++n) {
      auto f = [&](const Vector& p) { return trunk_features(model, p)(n); };
      const Vector fd_g = oracles::fd_gradient(f, y);
      const Matrix fd_h = oracles::fd_hessian(f, y);
      CHECK((tj.gradients.row(n).transpose() - fd_g).norm() <=
            1e-6 * std::max(1.0, fd_g.norm()));
      CHECK((tj.hessians[n] - fd_h).norm() <= 1e-4 * std::max(1.0, fd_h.norm()));
      // spot the pure-t second derivative the physics rows rely on
      CHECK(std::abs(tj.hessians[n](1, 1) - fd_h(1, 1)) <= 1e-4 * std::max(1.0, std::abs(fd_h(1, 1))));
    }
  }
}

TEST_CASE("evaluate computes the wrapped bilinear form", "[model]") {
  SECTION("hand bilinear case") {
    RannDeepOnet m;
    m.branch = RandomLayer{Matrix::Identity(2, 2), Vector::Zero(2), Activation::Identity};
    m.trunk = RandomLayer{Matrix::Identity(2, 2), Vector::Zero(2), Activation::Identity};
    m.alpha = Matrix::Identity(2, 2);
    const double got = evaluate(m, Vector{{1.0, 2.0}}, Vector{{3.0, 4.0}});
    CHECK(got == Catch::Approx(11.0));
  }
  SECTION("zero alpha returns the boundary data field") {
    auto c = std::make_shared<TimeScaledBubbleField>();
    RannDeepOnet m = small_model(82, dirichlet_wrapper(c));
    m.alpha = Matrix::Zero(6, 5);
    CHECK(evaluate(m, Vector::Ones(8), Vector{{0.4, 0.9}}) == 0.0);
  }
  SECTION("untrained model is rejected") {
    const RannDeepOnet m = small_model(83);
    CHECK_THROWS_MATCHES(evaluate(m, Vector::Ones(8), Vector{{0.1, 0.1}}), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Err::Untrained; }));
  }
}

TEST_CASE("hard constraint pins boundary values for arbitrary alpha", "[model]") {
  auto c = std::make_shared<TimeScaledBubbleField>();
  RannDeepOnet m = small_model(84, dirichlet_wrapper(c));
  m.alpha = random_alpha(6, 5, 85);
  Rng rng(86);
  const Vector f = Vector::NullaryExpr(8, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
  for (int i = 0; i < 200; ++i) {
    const double s = rng.uniform();
    for (const Vector y : {Vector{{0.0, s}}, Vector{{1.0, s}}, Vector{{s, 0.0}}})
      CHECK(std::abs(evaluate(m, f, y)) <= 1e-12);
  }
}

TEST_CASE("per-realization wrappers pin domain boundaries", "[model]") {
  RannDeepOnet m = small_model(87);
  m.alpha = random_alpha(6, 5, 88);
  Rng rng(89);
  const Vector f = Vector::NullaryExpr(8, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
  for (int t = 0; t < 3; ++t) {
    const DomainSpec dom = sample_domain(static_cast<Shape>(t), 900 + t);
    const auto cw = dirichlet_wrapper(std::make_shared<DomainConstraintField>(dom));
    const Matrix bp = boundary_points(dom, 100);
    for (int i = 0; i < bp.rows(); ++i)
      CHECK(std::abs(evaluate(m, f, Vector{{bp(i, 0), bp(i, 1)}}, &cw)) <= 1e-12);
  }
}

TEST_CASE("evaluate_batch matches pointwise evaluation", "[model]") {
  auto c = std::make_shared<TimeScaledBubbleField>();
  RannDeepOnet m = small_model(90, dirichlet_wrapper(c));
  m.alpha = random_alpha(6, 5, 91);
  Rng rng(92);
  const Vector f = Vector::NullaryExpr(8, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });

  Matrix pts(3, 2);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = rng.uniform();
  const Vector batch = evaluate_batch(m, f, pts);
  for (int i = 0; i < 3; ++i) {
    const double single = evaluate(m, f, Vector(pts.row(i)));
    CHECK(std::abs(batch(i) - single) <= 1e-15 * std::max(1.0, std::abs(single)));
  }

  CHECK(evaluate_batch(m, f, Matrix(0, 2)).size() == 0);

  Matrix boundary(2, 2);
  boundary << 0.0, 0.5, 1.0, 0.25;
  CHECK(evaluate_batch(m, f, boundary).isZero(1e-12));
}

TEST_CASE("evaluate is affine in alpha", "[model]") {
  auto c = std::make_shared<TimeScaledBubbleField>();
  RannDeepOnet m = small_model(93, dirichlet_wrapper(c));
  Rng rng(94);
  const Vector f = Vector::NullaryExpr(8, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
  const Matrix a1 = random_alpha(6, 5, 95), a2 = random_alpha(6, 5, 96);

  for (int i = 0; i < 50; ++i) {
    const Vector y{{rng.uniform(), rng.uniform()}};
    const double g = m.constraint.g_value(y);
    m.alpha = a1;
    const double g1 = evaluate(m, f, y);
    m.alpha = a2;
    const double g2 = evaluate(m, f, y);
    m.alpha = a1 + a2;
    CHECK(std::abs(evaluate(m, f, y) - (g1 + g2 - g)) <= 1e-12);
    m.alpha = 3.75 * a1;
    CHECK(std::abs(evaluate(m, f, y) - (3.75 * (g1 - g) + g)) <= 1e-12);
  }
}

TEST_CASE("periodic embedding makes x=0 and x=1 bit-consistent", "[model]") {
  PeriodicEmbedding embed;
  embed.omega = 2.0 * M_PI;
  embed.harmonics = 1;
  embed.periodic_dims = {0};
  embed.raw_dim = 2;
  RannDeepOnet m = small_model(97, {}, embed);
  m.alpha = random_alpha(6, 5, 98);
  Rng rng(99);
  const Vector f = Vector::NullaryExpr(8, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });

  for (int i = 0; i < 50; ++i) {
    const double t = rng.uniform();
    const Vector y0{{0.0, t}}, y1{{1.0, t}};
    CHECK(evaluate(m, f, y0) == evaluate(m, f, y1));
    const TrunkJet j0 = trunk_features_derivatives(m, y0, 2);
    const TrunkJet j1 = trunk_features_derivatives(m, y1, 2);
    CHECK(j0.values == j1.values);
    CHECK(j0.gradients == j1.gradients);
  }
}
