#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hcpinn/collocation.hpp"
#include "hcpinn/errors.hpp"
#include "hcpinn/problems1d.hpp"
#include "hcpinn/problems2d.hpp"
#include "hcpinn/window_ansatz2d.hpp"

// Loss assembly. Everything here is a plain sum of squared residuals in a
// fixed left-to-right order over the collocation lists, so a rerun with the
// same points reproduces the same floating-point value bit for bit.
//
// The field arguments are callables producing second-order jets:
//   1D        u(x)            -> Jet2<S>
//   2D        u(x, y, axis)   -> Jet2<S>, axis 0 = x, 1 = y
//   2D sided  u(m, x, y, dir) -> Jet2<S> on subdomain m along unit dir
//   2D dir    u(x, y, dir)    -> Jet2<S> along unit dir

namespace hcpinn {

// sum_k ( -kappa u''(x_k) - f(x_k) )^2. Points on an interface have no
// single-valued residual and are rejected.
template <class S, class Field>
S physics_loss_1d(const Problem1D& problem, std::span<const double> pts,
                  Field&& u) {
  S loss = S(0.0);
  const auto breaks = problem.interfaces();
  for (double x : pts) {
    for (double b : breaks)
      if (std::abs(x - b) < 1e-12)
        throw CollocationError("collocation point sits on an interface");
    const auto j = u(x);
    const S r = j.d2 * S(-problem.kappa_at(x)) - S(problem.source(x));
    loss = loss + r * r;
  }
  return loss;
}

// sum_k ( -kappa (u_xx + u_yy) - f )^2 at interior points.
template <class S, class Field>
S physics_loss_2d(const Problem2D& problem, std::span<const Point2> pts,
                  Field&& u) {
  S loss = S(0.0);
  for (const auto& pt : pts) {
    if (std::abs(problem.signed_normal_distance(pt.x, pt.y)) < 1e-12)
      throw CollocationError("collocation point sits on the interface");
    const double kap = problem.kappa_at(pt.x, pt.y);
    const auto jx = u(pt.x, pt.y, 0);
    const auto jy = u(pt.x, pt.y, 1);
    const S r = (jx.d2 + jy.d2) * S(-kap) - S(problem.source(pt.x, pt.y));
    loss = loss + r * r;
  }
  return loss;
}

// The four soft constraint terms, kept separate so the caller can weight
// them independently. Each is an unweighted sum of squared residuals.
template <class S>
struct SoftLossTerms {
  S dbc;        // Dirichlet boundary values
  S nbc;        // Neumann boundary slopes
  S itf_value;  // solution jump across interfaces
  S itf_flux;   // kappa u' jump across interfaces
};

namespace detail {
inline double jump_entry(const std::vector<double>& v, std::size_t i) {
  return v.empty() ? 0.0 : v[i];
}
}  // namespace detail

// u_on(m, x) -> Jet2<S> evaluated with the subdomain-m branch of the model;
// interface residuals probe both one-sided limits.
template <class S, class SideField>
SoftLossTerms<S> soft_losses_1d(const Problem1D& problem,
                                const CollocationSet1D& set,
                                SideField&& u_on) {
  if (set.boundary.size() != 2)
    throw ConfigError("1d collocation must carry both domain endpoints");
  SoftLossTerms<S> out{S(0.0), S(0.0), S(0.0), S(0.0)};
  const std::size_t last = problem.breaks.size() - 2;
  const auto bc = [&](std::size_t m, double x, const BoundaryCondition1D& c) {
    const auto j = u_on(m, x);
    if (c.type == BcType::Dirichlet) {
      const S r = j.v - S(c.value);
      out.dbc = out.dbc + r * r;
    } else {
      const S r = j.d1 - S(c.value);
      out.nbc = out.nbc + r * r;
    }
  };
  bc(0, set.boundary[0], problem.left);
  bc(last, set.boundary[1], problem.right);
  for (std::size_t i = 0; i < set.interface_pts.size(); ++i) {
    const double x = set.interface_pts[i];
    const auto below = u_on(i, x);
    const auto above = u_on(i + 1, x);
    const S rv = above.v - below.v - S(detail::jump_entry(problem.value_jump, i));
    const S rf = above.d1 * S(problem.kappa[i + 1]) -
                 below.d1 * S(problem.kappa[i]) -
                 S(detail::jump_entry(problem.flux_jump, i));
    out.itf_value = out.itf_value + rv * rv;
    out.itf_flux = out.itf_flux + rf * rf;
  }
  return out;
}

// 2D analogue. Neumann data is the conormal flux n . kappa grad u, matching
// the boundary segment convention; interface jumps are homogeneous.
template <class S, class SideField>
SoftLossTerms<S> soft_losses_2d(const Problem2D& problem,
                                const CollocationSet2D& set,
                                SideField&& u_on) {
  if (set.boundary.size() != problem.boundary.size())
    throw ConfigError("boundary sample lists do not match the segments");
  SoftLossTerms<S> out{S(0.0), S(0.0), S(0.0), S(0.0)};
  for (std::size_t s = 0; s < set.boundary.size(); ++s) {
    const auto& seg = problem.boundary[s];
    for (const auto& pt : set.boundary[s]) {
      const std::size_t m = problem.subdomain_of(pt.x, pt.y);
      const auto j = u_on(m, pt.x, pt.y, seg.normal);
      if (seg.type == BcType::Dirichlet) {
        const S r = j.v - S(seg.value);
        out.dbc = out.dbc + r * r;
      } else {
        const S r = j.d1 * S(problem.kappa[m]) - S(seg.value);
        out.nbc = out.nbc + r * r;
      }
    }
  }
  const Point2 n = problem.itf_normal_left();
  for (const auto& pt : set.interface_pts) {
    const auto left = u_on(0, pt.x, pt.y, n);
    const auto right = u_on(1, pt.x, pt.y, n);
    const S rv = left.v - right.v;
    const S rf = left.d1 * S(problem.kappa[0]) - right.d1 * S(problem.kappa[1]);
    out.itf_value = out.itf_value + rv * rv;
    out.itf_flux = out.itf_flux + rf * rf;
  }
  return out;
}

// Residual of the strong form multiplied by r^2 and written in polar
// coordinates about the nearest corner node:
//
//   -r d/dr ( r kappa du/dr ) - d/da ( kappa du/da ) - r^2 f.
//
// This damps the loss near corner nodes, where the windowed ansatz has
// radial coordinate singularities, and replaces the Cartesian residual for
// every collocation point when used. The angular second derivative comes
// from the two directional jets: u_aa = r^2 u_ee - r u_r, with e the
// azimuthal unit vector.
template <class S, class DirField>
S polar_physics_loss(const Problem2D& problem, std::span<const Point2> pts,
                     std::span<const CornerElement2D> corners, DirField&& u) {
  if (corners.empty())
    throw ConfigError("polar residual needs at least one corner node");
  S loss = S(0.0);
  for (const auto& pt : pts) {
    if (std::abs(problem.signed_normal_distance(pt.x, pt.y)) < 1e-12)
      throw CollocationError("collocation point sits on the interface");
    double best = std::numeric_limits<double>::infinity();
    Point2 c{};
    for (const auto& el : corners) {
      const double dx = pt.x - el.center.x, dy = pt.y - el.center.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        c = el.center;
      }
    }
    const double px = pt.x - c.x, py = pt.y - c.y;
    const double r = std::hypot(px, py);
    if (r < 1e-12)
      throw CollocationError("collocation point sits on a corner node");
    const Point2 radial{px / r, py / r};
    const Point2 azimuthal{-py / r, px / r};
    const auto jr = u(pt.x, pt.y, radial);
    const auto ja = u(pt.x, pt.y, azimuthal);
    const double kap = problem.kappa_at(pt.x, pt.y);
    const S u_aa = (ja.d2 * S(r) - jr.d1) * S(r);
    const S lhs = (jr.d1 * S(r) + jr.d2 * S(r * r) + u_aa) * S(-kap);
    const S res = lhs - S(r * r * problem.source(pt.x, pt.y));
    loss = loss + res * res;
  }
  return loss;
}

}  // namespace hcpinn
