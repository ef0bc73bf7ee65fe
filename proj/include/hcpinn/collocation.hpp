#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hcpinn/errors.hpp"
#include "hcpinn/problems1d.hpp"
#include "hcpinn/problems2d.hpp"

// Collocation sampling. Interior points live on a uniform grid shifted by
// half a spacing, which keeps them off the domain boundary and off window
// node centers without special casing. Subdomain breaks can still collide
// with the shifted grid (a break at a half-integer multiple of the spacing),
// so the builders nudge such points by a quarter spacing and then verify
// that every interior point is strictly inside one subdomain.

namespace hcpinn {

struct CollocationSet1D {
  std::vector<double> interior;
  std::vector<double> boundary;       // the two domain endpoints
  std::vector<double> interface_pts;  // the interior breaks
};

inline CollocationSet1D collocation_1d(const Problem1D& problem,
                                       std::size_t count) {
  if (count == 0)
    throw ConfigError("need at least one interior collocation point");
  const double lo = problem.breaks.front();
  const double hi = problem.breaks.back();
  const double dx = (hi - lo) / static_cast<double>(count);
  const double tol = 1e-12 * std::max(1.0, std::abs(hi - lo));

  CollocationSet1D set;
  set.interior.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double x = lo + (static_cast<double>(k) + 0.5) * dx;
    for (double b : problem.breaks)
      if (std::abs(x - b) < tol) x += 0.25 * dx;
    for (double b : problem.breaks)
      if (std::abs(x - b) < tol)
        throw CollocationError("interior point stuck on a subdomain break");
    set.interior.push_back(x);
  }
  set.boundary = {lo, hi};
  set.interface_pts = problem.interfaces();
  return set;
}

struct CollocationSet2D {
  std::vector<Point2> interior;
  std::vector<std::vector<Point2>> boundary;  // one list per segment
  std::vector<Point2> interface_pts;
};

// nx-by-ny interior grid plus per-segment boundary samples and interface
// samples, all midpoint-placed so segment endpoints (corners, interface
// junctions) are never sampled.
inline CollocationSet2D collocation_2d(const Problem2D& problem,
                                       std::size_t nx, std::size_t ny,
                                       std::size_t per_segment = 32,
                                       std::size_t on_interface = 32) {
  if (nx == 0 || ny == 0)
    throw ConfigError("interior collocation grid must be nonempty");
  if (per_segment == 0 || on_interface == 0)
    throw ConfigError("boundary and interface sample counts must be positive");
  const double dx = (problem.xmax - problem.xmin) / static_cast<double>(nx);
  const double dy = (problem.ymax - problem.ymin) / static_cast<double>(ny);
  const double tol = 1e-9 * std::max(problem.xmax - problem.xmin,
                                     problem.ymax - problem.ymin);

  CollocationSet2D set;
  set.interior.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double y = problem.ymin + (static_cast<double>(j) + 0.5) * dy;
    for (std::size_t i = 0; i < nx; ++i) {
      double x = problem.xmin + (static_cast<double>(i) + 0.5) * dx;
      if (std::abs(problem.signed_normal_distance(x, y)) < tol) x += 0.25 * dx;
      if (std::abs(problem.signed_normal_distance(x, y)) < tol)
        throw CollocationError("interior point stuck on the interface");
      set.interior.push_back({x, y});
    }
  }
  set.boundary.resize(problem.boundary.size());
  for (std::size_t s = 0; s < problem.boundary.size(); ++s) {
    auto& pts = set.boundary[s];
    pts.reserve(per_segment);
    for (std::size_t i = 0; i < per_segment; ++i)
      pts.push_back(problem.boundary[s].at(
          (static_cast<double>(i) + 0.5) / static_cast<double>(per_segment)));
  }
  set.interface_pts.reserve(on_interface);
  for (std::size_t i = 0; i < on_interface; ++i)
    set.interface_pts.push_back(problem.itf_point(
        (static_cast<double>(i) + 0.5) / static_cast<double>(on_interface)));
  return set;
}

}  // namespace hcpinn
