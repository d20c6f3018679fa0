#include "rdo/geometry.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rdo;

TEST_CASE("rectangle rule and hand geometry", "[geometry]") {
  const Rect r = rectangle_from_draws({0.3, 0.1, 0.4, 0.2});
  CHECK(r.xmin == Catch::Approx(0.1));
  CHECK(r.ymin == Catch::Approx(0.2));
  CHECK(r.xmax == Catch::Approx(1.3));
  CHECK(r.ymax == Catch::Approx(1.4));
  CHECK((r.xmax - r.xmin) * (r.ymax - r.ymin) == Catch::Approx(1.44));

  const IsoTriangle t{1.0, 1.8, 1.2, 1.6};
  CHECK(t.left_base()[0] == Catch::Approx(0.2));
  CHECK(t.left_base()[1] == Catch::Approx(0.6));
  CHECK(t.right_base()[0] == Catch::Approx(1.8));
  CHECK(t.right_base()[1] == Catch::Approx(0.6));
}

TEST_CASE("sampled domains stay in their parameter ranges", "[geometry]") {
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto d = sample_domain(Shape::Ellipse, s);
    const auto& e = std::get<Ellipse>(d);
    CHECK(e.xc >= 0.8);
    CHECK(e.xc <= 1.2);
    CHECK(e.yc >= 0.8);
    CHECK(e.yc <= 1.2);
    CHECK(e.a >= 0.3);
    CHECK(e.a <= 0.8);
  }
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto r = std::get<Rect>(sample_domain(Shape::Rectangle, s));
    CHECK(r.xmin < r.xmax);
    CHECK(r.ymin < r.ymax);
    CHECK(r.xmax <= 2.0);
    const auto t = std::get<IsoTriangle>(sample_domain(Shape::Triangle, s));
    CHECK(t.yv >= 1.5);
    CHECK(t.yv <= 2.0);
    CHECK(t.yv - t.height > 0.0);
  }
}

TEST_CASE("boundary points are uniformly spaced on polygons", "[geometry]") {
  // square with perimeter 4 and count 100: spacing 0.04, every side divides
  const Rect sq{0.0, 0.0, 1.0, 1.0};
  const Matrix pts = boundary_points(sq, 100);
  REQUIRE(pts.rows() == 100);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d a = pts.row(i), b = pts.row((i + 1) % 100);
    CHECK((a - b).norm() == Catch::Approx(0.04).margin(1e-12));
  }
  CHECK(pts(0, 0) == 0.0);  // deterministic anchor at the first vertex
  CHECK(pts(0, 1) == 0.0);
}

TEST_CASE("circle boundary points sit at radius R", "[geometry]") {
  const Ellipse circle{1.0, 1.0, 0.6, 0.6, 0.0};
  const Matrix pts = boundary_points(circle, 100);
  for (int i = 0; i < 100; ++i) {
    const double r = std::hypot(pts(i, 0) - 1.0, pts(i, 1) - 1.0);
    CHECK(std::abs(r - 0.6) <= 1e-14);
  }
}

TEST_CASE("boundary points lie on the zero level set", "[geometry]") {
  const std::vector<DomainSpec> domains = {
      Ellipse{1.0, 1.0, 0.5, 0.3, M_PI / 6.0},
      Rect{0.3, 0.4, 1.5, 1.2},
      IsoTriangle{1.0, 1.7, 1.1, 1.5},
  };
  for (const auto& d : domains) {
    const Matrix pts = boundary_points(d, 100);
    for (int i = 0; i < 100; ++i)
      CHECK(std::abs(c_field(d, pts(i, 0), pts(i, 1)).value) <= 1e-12);
  }
}

TEST_CASE("constraint field values", "[geometry]") {
  const Ellipse e{1.0, 0.9, 0.5, 0.4, 0.7};
  CHECK(c_field(e, e.xc, e.yc).value == 1.0);  // center plugs in exactly

  const Rect r{0.2, 0.5, 1.4, 1.7};
  CHECK(c_field(r, r.xmin, r.ymin).value == 0.0);
  const double cx = (r.xmin + r.xmax) / 2.0, cy = (r.ymin + r.ymax) / 2.0;
  const double hx = (r.xmax - r.xmin) / 2.0, hy = (r.ymax - r.ymin) / 2.0;
  CHECK(c_field(r, cx, cy).value == Catch::Approx(hx * hx * hy * hy));
}

TEST_CASE("constraint field derivatives match finite differences", "[geometry]") {
  const std::vector<DomainSpec> domains = {
      Ellipse{1.0, 1.1, 0.6, 0.45, 1.1},
      Rect{0.25, 0.3, 1.6, 1.5},
      IsoTriangle{1.0, 1.9, 1.3, 1.8},
  };
  Rng rng(17);
  for (const auto& d : domains) {
    int tested = 0;
    while (tested < 100) {
      const double x = rng.uniform(0.0, 2.0), y = rng.uniform(0.0, 2.0);
      // keep a margin so the FD stencil stays on the smooth branch
      if (c_field(d, x, y).value < 1e-2) continue;
      ++tested;
      const CFieldJet jet = c_field(d, x, y, 2);
      auto f = [&](const Vector& p) { return c_field(d, p(0), p(1)).value; };
      const Vector x0{{x, y}};
      const Vector fd_g = oracles::fd_gradient(f, x0);
      const Matrix fd_h = oracles::fd_hessian(f, x0);
      CHECK((jet.grad - fd_g).norm() <= 1e-6 * std::max(1.0, fd_g.norm()));
      CHECK((jet.hess - fd_h).norm() <= 1e-4 * std::max(1.0, fd_h.norm()));
    }
  }
}

TEST_CASE("containment agrees with c positivity and brute force", "[geometry]") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Shape shape = static_cast<Shape>(trial % 3);
    const DomainSpec d = sample_domain(shape, 1000 + trial);

    const auto c = centroid(d);
    CHECK(contains(d, c[0], c[1]));
    CHECK(c_field(d, c[0], c[1]).value > 0.0);
    CHECK_FALSE(contains(d, -5.0, -5.0));

    for (int i = 0; i < 20000; ++i) {
      const double x = rng.uniform(-0.2, 2.2), y = rng.uniform(-0.2, 2.2);
      const double cv = c_field(d, x, y).value;
      CHECK(cv >= 0.0);
      const bool in = contains(d, x, y);
      CHECK(in == (cv > 0.0));
      if (shape != Shape::Ellipse) {
        // independent ray-casting oracle for the polygon shapes
        std::vector<std::array<double, 2>> verts;
        if (const auto* r = std::get_if<Rect>(&d))
          verts = {{r->xmin, r->ymin}, {r->xmax, r->ymin}, {r->xmax, r->ymax}, {r->xmin, r->ymax}};
        else {
          const auto& t = std::get<IsoTriangle>(d);
          verts = {t.left_base(), t.right_base(), t.apex()};
        }
        if (in != oracles::ray_cast_inside(verts, x, y)) {
          // disagreement is only tolerable within rounding of an edge
          double nearest = 1e300;
          const Matrix bp = boundary_points(d, 400);
          for (int bi = 0; bi < bp.rows(); ++bi)
            nearest = std::min(nearest, std::hypot(bp(bi, 0) - x, bp(bi, 1) - y));
          CHECK(nearest < 1e-6);
        }
      } else {
        const auto& el = std::get<Ellipse>(d);
        const double dx = x - el.xc, dy = y - el.yc;
        const double u = (dx * std::cos(el.theta) + dy * std::sin(el.theta)) / el.a;
        const double v = (dy * std::cos(el.theta) - dx * std::sin(el.theta)) / el.b;
        CHECK(in == (u * u + v * v < 1.0));
      }
    }
  }
}

TEST_CASE("triangle product form is invariant to vertex rotation", "[geometry]") {
  const IsoTriangle t{1.0, 1.8, 1.2, 1.6};
  const std::vector<std::array<double, 2>> loop = {t.left_base(), t.right_base(), t.apex()};
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(0.0, 2.0), y = rng.uniform(0.0, 2.0);
    double products[3];
    for (int shift = 0; shift < 3; ++shift) {
      double prod = 1.0;
      for (int e = 0; e < 3; ++e) {
        const auto& p1 = loop[(e + shift) % 3];
        const auto& p2 = loop[(e + shift + 1) % 3];
        const double len = std::hypot(p2[0] - p1[0], p2[1] - p1[1]);
        prod *= ((p2[0] - p1[0]) * (y - p1[1]) - (p2[1] - p1[1]) * (x - p1[0])) / len;
      }
      products[shift] = prod;
    }
    CHECK(std::abs(products[0] - products[1]) <= 1e-14 * std::max(1.0, std::abs(products[0])));
    CHECK(std::abs(products[0] - products[2]) <= 1e-14 * std::max(1.0, std::abs(products[0])));
    if (contains(DomainSpec(t), x, y))
      CHECK(c_field(DomainSpec(t), x, y).value == Catch::Approx(products[0]));
  }
}

TEST_CASE("domain serialization round-trips", "[geometry]") {
  for (int s = 0; s < 9; ++s) {
    const DomainSpec d = sample_domain(static_cast<Shape>(s % 3), 50 + s);
    const DomainSpec back = domain_from_params(shape_code(d), domain_params(d));
    CHECK(domain_params(back) == domain_params(d));
    CHECK(shape_code(back) == shape_code(d));
  }
}
