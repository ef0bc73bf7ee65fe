#pragma once

// Two-dimensional benchmark problem: rectangular domain cut by one straight,
// slanted interface,
//
//   -div( kappa grad u ) = f   on [xmin,xmax] x [ymin,ymax],
//
// with piecewise-constant kappa per side of the interface, Dirichlet data on
// the part of the outer boundary belonging to the right subdomain and
// Neumann data on the part belonging to the left one. The reference solution
// is a grid field produced by the solver in reference2d.hpp; this header only
// carries geometry, coefficients, source and boundary data.

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "problems1d.hpp"  // BcType

namespace hcpinn {

struct Point2 {
  double x = 0.0, y = 0.0;
};

struct GaussianSource2D {
  Point2 center;
  double radius;
  double amplitude;
};

// One straight piece of the outer boundary carrying a single condition type.
// Oriented a -> b counterclockwise around the domain; `normal` is the
// outward unit normal.
struct BoundarySegment2D {
  Point2 a, b;
  Point2 normal;
  BcType type;
  double value;  // u for Dirichlet, n . kappa grad u for Neumann

  double length() const { return std::hypot(b.x - a.x, b.y - a.y); }
  Point2 at(double t) const {
    return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
  }
};

// Rectangle split by the straight interface running from (x_bottom, ymin) to
// (x_top, ymax). Subdomain 0 lies left of that line, subdomain 1 right of
// it; a point exactly on the line counts as subdomain 1, the same half-open
// rule the 1D problems use for x >= x_itf.
struct Problem2D {
  std::string name;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  double x_bottom = 0.5, x_top = 0.5;  // interface x at y = ymin / y = ymax
  std::vector<double> kappa;           // size 2: {left, right}
  std::vector<GaussianSource2D> gaussians;
  std::vector<BoundarySegment2D> boundary;

  bool contains(double x, double y) const {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }

  // Interface parameterization, t in [0, 1] from the bottom endpoint.
  Point2 itf_point(double t) const {
    return {x_bottom + t * (x_top - x_bottom), ymin + t * (ymax - ymin)};
  }
  double itf_length() const {
    return std::hypot(x_top - x_bottom, ymax - ymin);
  }
  Point2 itf_tangent() const {
    const double len = itf_length();
    return {(x_top - x_bottom) / len, (ymax - ymin) / len};
  }
  // Unit normal pointing into subdomain 0 (the smaller-x side).
  Point2 itf_normal_left() const {
    const auto t = itf_tangent();
    return {-t.y, t.x};
  }
  // Signed distance to the interface line: positive in subdomain 0.
  double signed_normal_distance(double x, double y) const {
    const auto n = itf_normal_left();
    return (x - x_bottom) * n.x + (y - ymin) * n.y;
  }
  // Projection onto the interface as a fraction of its length; in [0, 1]
  // for points between the two endpoint altitudes.
  double arclength_fraction(double x, double y) const {
    const auto t = itf_tangent();
    return ((x - x_bottom) * t.x + (y - ymin) * t.y) / itf_length();
  }

  std::size_t subdomain_of(double x, double y) const {
    if (!contains(x, y)) throw GeometryError("point outside domain");
    return signed_normal_distance(x, y) > 0.0 ? 0 : 1;
  }
  double kappa_at(double x, double y) const {
    return kappa[subdomain_of(x, y)];
  }

  double source(double x, double y) const {
    double f = 0.0;
    for (const auto& g : gaussians) {
      const double dx = x - g.center.x, dy = y - g.center.y;
      f += g.amplitude * std::exp(-(dx * dx + dy * dy) / (g.radius * g.radius));
    }
    return f;
  }

  // Boundary segment containing the given boundary point. Where two
  // segments meet, the one whose condition type matches the point's
  // subdomain side wins (Dirichlet belongs to subdomain 1).
  const BoundarySegment2D& boundary_condition(double x, double y) const {
    const BcType want =
        subdomain_of(x, y) == 1 ? BcType::Dirichlet : BcType::Neumann;
    const BoundarySegment2D* fallback = nullptr;
    for (const auto& s : boundary) {
      const double cross =
          (s.b.x - s.a.x) * (y - s.a.y) - (s.b.y - s.a.y) * (x - s.a.x);
      const double dot =
          (s.b.x - s.a.x) * (x - s.a.x) + (s.b.y - s.a.y) * (y - s.a.y);
      const double len2 = (s.b.x - s.a.x) * (s.b.x - s.a.x) +
                          (s.b.y - s.a.y) * (s.b.y - s.a.y);
      if (std::abs(cross) > 1e-12 || dot < -1e-12 || dot > len2 + 1e-12)
        continue;
      if (s.type == want) return s;
      fallback = &s;
    }
    if (fallback) return *fallback;
    throw GeometryError("point not on the outer boundary");
  }
};

namespace detail {

inline void self_check_problem2d(const Problem2D& p) {
  if (p.kappa.size() != 2 || p.kappa[0] <= 0.0 || p.kappa[1] <= 0.0)
    throw ConfigError(p.name + ": need two positive conductivities");
  if (p.xmax <= p.xmin || p.ymax <= p.ymin)
    throw ConfigError(p.name + ": empty domain");
  if (p.boundary.empty()) throw ConfigError(p.name + ": no boundary data");
  const double cx = 0.5 * (p.xmin + p.xmax), cy = 0.5 * (p.ymin + p.ymax);
  for (std::size_t i = 0; i < p.boundary.size(); ++i) {
    const auto& s = p.boundary[i];
    const auto& next = p.boundary[(i + 1) % p.boundary.size()];
    if (std::hypot(s.b.x - next.a.x, s.b.y - next.a.y) > 1e-12)
      throw ConfigError(p.name + ": boundary segments do not form a loop");
    const double nlen = std::hypot(s.normal.x, s.normal.y);
    if (std::abs(nlen - 1.0) > 1e-12)
      throw ConfigError(p.name + ": boundary normal not unit length");
    const auto mid = s.at(0.5);
    const double outward =
        s.normal.x * (mid.x - cx) + s.normal.y * (mid.y - cy);
    if (outward <= 0.0)
      throw ConfigError(p.name + ": boundary normal points inward");
    // Condition type must agree with the side of the interface.
    const BcType expect =
        p.subdomain_of(mid.x, mid.y) == 1 ? BcType::Dirichlet : BcType::Neumann;
    if (s.type != expect)
      throw ConfigError(p.name + ": condition type inconsistent with side");
  }
  // The source maxima sit at the Gaussian centers; cross-tails from the
  // other bumps shift each peak by a few 1e-6 at most.
  for (const auto& g : p.gaussians) {
    if (std::abs(p.source(g.center.x, g.center.y) - g.amplitude) > 1e-5)
      throw ConfigError(p.name + ": source amplitude check failed");
  }
}

}  // namespace detail

// Problem 4: [0,2] x [0,1], interface from (0.8, 0) to (1.2, 1),
// kappa = 0.1 left of the line and 1 right of it. Homogeneous Dirichlet on
// the boundary part of the right subdomain, homogeneous Neumann on the
// left part. Source: sum of three Gaussian bumps.
inline Problem2D problem4() {
  Problem2D p;
  p.name = "p4";
  p.xmin = 0.0;
  p.xmax = 2.0;
  p.ymin = 0.0;
  p.ymax = 1.0;
  p.x_bottom = 0.8;
  p.x_top = 1.2;
  p.kappa = {0.1, 1.0};
  p.gaussians = {{{0.3, 0.6}, 0.08, 10.0},
                 {{1.0, 0.2}, 0.2, 20.0},
                 {{1.6, 0.7}, 0.1, 15.0}};
  const auto D = BcType::Dirichlet, N = BcType::Neumann;
  p.boundary = {
      {{0.0, 0.0}, {0.8, 0.0}, {0.0, -1.0}, N, 0.0},  // bottom, left of cut
      {{0.8, 0.0}, {2.0, 0.0}, {0.0, -1.0}, D, 0.0},  // bottom, right of cut
      {{2.0, 0.0}, {2.0, 1.0}, {1.0, 0.0}, D, 0.0},   // right edge
      {{2.0, 1.0}, {1.2, 1.0}, {0.0, 1.0}, D, 0.0},   // top, right of cut
      {{1.2, 1.0}, {0.0, 1.0}, {0.0, 1.0}, N, 0.0},   // top, left of cut
      {{0.0, 1.0}, {0.0, 0.0}, {-1.0, 0.0}, N, 0.0},  // left edge
  };
  detail::self_check_problem2d(p);
  return p;
}

}  // namespace hcpinn
