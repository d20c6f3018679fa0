#pragma once

#include "rdo/common.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <variant>
#include <vector>

namespace rdo {

// Parametric domains for the domain-to-solution benchmark. All live inside
// the box [0,2] x [0,2]; type codes 0/1/2 are the serialization convention.

struct Ellipse {
  double xc, yc;
  double a, b;  // semi-axes along the rotated x/y directions
  double theta;
};

struct Rect {
  double xmin, ymin, xmax, ymax;
};

struct IsoTriangle {
  double xv, yv;   // apex
  double height;   // apex sits `height` above the base
  double base;     // base edge length, centered under the apex

  std::array<double, 2> apex() const { return {xv, yv}; }
  std::array<double, 2> left_base() const { return {xv - base / 2.0, yv - height}; }
  std::array<double, 2> right_base() const { return {xv + base / 2.0, yv - height}; }
};

using DomainSpec = std::variant<Ellipse, Rect, IsoTriangle>;

enum class Shape { Ellipse = 0, Rectangle = 1, Triangle = 2 };

inline int shape_code(const DomainSpec& d) { return static_cast<int>(d.index()); }

/// Domain parameter vector as serialized: fixed order per shape.
inline std::vector<double> domain_params(const DomainSpec& d) {
  if (const auto* e = std::get_if<Ellipse>(&d)) return {e->xc, e->yc, e->a, e->b, e->theta};
  if (const auto* r = std::get_if<Rect>(&d)) return {r->xmin, r->ymin, r->xmax, r->ymax};
  const auto& t = std::get<IsoTriangle>(d);
  return {t.xv, t.yv, t.height, t.base};
}

inline DomainSpec domain_from_params(int code, const std::vector<double>& p) {
  switch (code) {
    case 0:
      require(p.size() == 5, Err::CorruptManifest, "ellipse expects 5 parameters");
      return Ellipse{p[0], p[1], p[2], p[3], p[4]};
    case 1:
      require(p.size() == 4, Err::CorruptManifest, "rectangle expects 4 parameters");
      return Rect{p[0], p[1], p[2], p[3]};
    case 2:
      require(p.size() == 4, Err::CorruptManifest, "triangle expects 4 parameters");
      return IsoTriangle{p[0], p[1], p[2], p[3]};
    default:
      fail(Err::CorruptManifest, "unknown shape code " + std::to_string(code));
  }
}

/// Rectangle rule: sort four unit draws ascending, stretch the upper pair by
/// one box width so the domain cannot degenerate.
inline Rect rectangle_from_draws(std::array<double, 4> draws) {
  std::sort(draws.begin(), draws.end());
  return Rect{draws[0], draws[1], draws[2] + 1.0, draws[3] + 1.0};
}

/// Random domain generation. Draw order is fixed so a seed pins the shape.
inline DomainSpec sample_domain(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  switch (shape) {
    case Shape::Ellipse: {
      Ellipse e;
      e.xc = rng.uniform(0.8, 1.2);
      e.yc = rng.uniform(0.8, 1.2);
      e.a = rng.uniform(0.3, 0.8);
      e.b = rng.uniform(0.3, 0.8);
      e.theta = rng.uniform(0.0, 2.0 * M_PI);
      return e;
    }
    case Shape::Rectangle:
      return rectangle_from_draws({rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()});
    case Shape::Triangle: {
      IsoTriangle t;
      t.xv = 1.0;
      t.yv = rng.uniform(1.5, 2.0);
      t.height = rng.uniform(0.9, 1.5);
      t.base = rng.uniform(1.2, 2.0);
      return t;
    }
  }
  fail(Err::ConfigInvalid, "unreachable shape");
}

namespace detail {

// Signed distance to the line through directed edge p1 -> p2; positive on the
// left, which is the interior side for counterclockwise vertex order. The unit
// normalization makes the rectangle product reduce to
// (x - xmin)(xmax - x)(y - ymin)(ymax - y).
inline double edge_value(const std::array<double, 2>& p1, const std::array<double, 2>& p2,
                         double x, double y) {
  const double len = std::hypot(p2[0] - p1[0], p2[1] - p1[1]);
  return ((p2[0] - p1[0]) * (y - p1[1]) - (p2[1] - p1[1]) * (x - p1[0])) / len;
}

// CCW vertex loop of a polygon domain.
inline std::vector<std::array<double, 2>> polygon_vertices(const DomainSpec& d) {
  if (const auto* r = std::get_if<Rect>(&d))
    return {{r->xmin, r->ymin}, {r->xmax, r->ymin}, {r->xmax, r->ymax}, {r->xmin, r->ymax}};
  const auto& t = std::get<IsoTriangle>(d);
  return {t.left_base(), t.right_base(), t.apex()};
}

}  // namespace detail

/// Continuous signed inside-ness: positive strictly inside, zero on the
/// boundary, negative outside. Not a distance; used for boundary root finding.
inline double signed_inside(const DomainSpec& d, double x, double y) {
  if (const auto* e = std::get_if<Ellipse>(&d)) {
    const double ct = std::cos(e->theta), st = std::sin(e->theta);
    const double u = ((x - e->xc) * ct + (y - e->yc) * st) / e->a;
    const double v = ((y - e->yc) * ct - (x - e->xc) * st) / e->b;
    return 1.0 - u * u - v * v;
  }
  const auto verts = detail::polygon_vertices(d);
  const std::size_t m = verts.size();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i)
    worst = std::min(worst, detail::edge_value(verts[i], verts[(i + 1) % m], x, y));
  return worst;
}

inline bool contains(const DomainSpec& d, double x, double y) {
  if (const auto* e = std::get_if<Ellipse>(&d)) {
    const double ct = std::cos(e->theta), st = std::sin(e->theta);
    const double u = ((x - e->xc) * ct + (y - e->yc) * st) / e->a;
    const double v = ((y - e->yc) * ct - (x - e->xc) * st) / e->b;
    return 1.0 - u * u - v * v > 0.0;
  }
  const auto verts = detail::polygon_vertices(d);
  const std::size_t m = verts.size();
  for (std::size_t i = 0; i < m; ++i)
    if (detail::edge_value(verts[i], verts[(i + 1) % m], x, y) <= 0.0) return false;
  return true;
}

/// Value, gradient and Hessian of the hard-constraint field c. Outside the
/// domain (boundary included) everything is zero; inside, the smooth branch
/// is differentiated analytically.
struct CFieldJet {
  double value = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

inline CFieldJet c_field(const DomainSpec& d, double x, double y, int order = 0) {
  require(order >= 0 && order <= 2, Err::UnsupportedOrder, "c_field supports order <= 2");
  CFieldJet jet;
  if (!contains(d, x, y)) return jet;

  if (const auto* e = std::get_if<Ellipse>(&d)) {
    const double ct = std::cos(e->theta), st = std::sin(e->theta);
    const double u = ((x - e->xc) * ct + (y - e->yc) * st) / e->a;
    const double v = ((y - e->yc) * ct - (x - e->xc) * st) / e->b;
    jet.value = 1.0 - u * u - v * v;
    if (order >= 1) {
      const Eigen::Vector2d du(ct / e->a, st / e->a);
      const Eigen::Vector2d dv(-st / e->b, ct / e->b);
      jet.grad = -2.0 * u * du - 2.0 * v * dv;
      if (order == 2) jet.hess = -2.0 * (du * du.transpose() + dv * dv.transpose());
    }
    return jet;
  }

  // Polygon branch: product of CCW edge functions (all positive inside).
  const auto verts = detail::polygon_vertices(d);
  const std::size_t m = verts.size();
  std::vector<double> vals(m);
  std::vector<Eigen::Vector2d> grads(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& p1 = verts[i];
    const auto& p2 = verts[(i + 1) % m];
    vals[i] = detail::edge_value(p1, p2, x, y);
    const double len = std::hypot(p2[0] - p1[0], p2[1] - p1[1]);
    grads[i] = Eigen::Vector2d(-(p2[1] - p1[1]) / len, (p2[0] - p1[0]) / len);
  }
  double prod = 1.0;
  for (double v : vals) prod *= v;
  jet.value = prod;
  if (order >= 1) {
    for (std::size_t i = 0; i < m; ++i) {
      double rest = 1.0;
      for (std::size_t l = 0; l < m; ++l)
        if (l != i) rest *= vals[l];
      jet.grad += rest * grads[i];
      if (order == 2) {
        for (std::size_t l = i + 1; l < m; ++l) {
          double rest2 = 1.0;
          for (std::size_t r = 0; r < m; ++r)
            if (r != i && r != l) rest2 *= vals[r];
          const Eigen::Matrix2d cross = grads[i] * grads[l].transpose();
          jet.hess += rest2 * (cross + cross.transpose());
        }
      }
    }
  }
  return jet;
}

/// Boundary discretization: uniformly spaced in arc-length parameter for
/// polygons (starting at the first CCW vertex), uniform in parametric angle
/// for ellipses. Counterclockwise order, deterministic anchor.
inline Matrix boundary_points(const DomainSpec& d, int count) {
  require(count >= 3, Err::ConfigInvalid, "need at least 3 boundary points");
  Matrix pts(count, 2);

  if (const auto* e = std::get_if<Ellipse>(&d)) {
    const double ct = std::cos(e->theta), st = std::sin(e->theta);
    // anchor where the boundary crosses the world +x direction from the
    // center, so the polyline start does not spin with the tilt angle
    const double phi0 = std::atan2(-e->a * st, e->b * ct);
    for (int i = 0; i < count; ++i) {
      const double phi = phi0 + 2.0 * M_PI * i / count;
      const double px = e->a * std::cos(phi), py = e->b * std::sin(phi);
      pts(i, 0) = e->xc + px * ct - py * st;
      pts(i, 1) = e->yc + px * st + py * ct;
    }
    return pts;
  }

  const auto verts = detail::polygon_vertices(d);
  const std::size_t m = verts.size();
  std::vector<double> seg_len(m);
  double perimeter = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& p1 = verts[i];
    const auto& p2 = verts[(i + 1) % m];
    seg_len[i] = std::hypot(p2[0] - p1[0], p2[1] - p1[1]);
    perimeter += seg_len[i];
  }
  for (int i = 0; i < count; ++i) {
    double s = perimeter * i / count;
    std::size_t seg = 0;
    while (seg + 1 < m && s > seg_len[seg]) s -= seg_len[seg], ++seg;
    const auto& p1 = verts[seg];
    const auto& p2 = verts[(seg + 1) % m];
    const double t = s / seg_len[seg];
    pts(i, 0) = p1[0] + t * (p2[0] - p1[0]);
    pts(i, 1) = p1[1] + t * (p2[1] - p1[1]);
  }
  return pts;
}

inline std::array<double, 2> centroid(const DomainSpec& d) {
  if (const auto* e = std::get_if<Ellipse>(&d)) return {e->xc, e->yc};
  if (const auto* r = std::get_if<Rect>(&d))
    return {(r->xmin + r->xmax) / 2.0, (r->ymin + r->ymax) / 2.0};
  const auto& t = std::get<IsoTriangle>(d);
  return {t.xv, t.yv - 2.0 * t.height / 3.0};
}

}  // namespace rdo
