#pragma once

// Reference solver for the 2D interface problem.
//
// Piecewise-linear finite elements on a structured triangulation. Two
// refinements over a plain grid keep the scheme second order in L2:
//
//  * fitted: in every node row the horizontally nearest node is shifted
//    onto the interface crossing, so the slanted line (and its endpoints,
//    where the boundary condition type changes) is a union of mesh edges
//    at every resolution;
//  * graded: the tensor node lines come from fixed inverse-CDF density
//    maps that crowd nodes toward the two junction corners, whose mixed
//    Dirichlet/Neumann wedge solution behaves like r^0.74 and would
//    otherwise pollute the global rate.
//
// Node positions depend only on the index fraction i/(n-1), so halving the
// spacing reproduces the coarse nodes bitwise; self-convergence checks can
// compare at shared nodes exactly. The SPD system is solved with
// Jacobi-preconditioned conjugate gradients, then sampled onto a uniform
// grid for the bilinear oracle/export format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "problems2d.hpp"

namespace hcpinn {

// Uniform-grid scalar field with bilinear interpolation; doubles as the
// reference oracle for the 2D problem and as a cache/export format.
struct Field2D {
  int nx = 0, ny = 0;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  std::vector<double> u;  // row-major, index j*nx + i

  double node_x(int i) const {
    return xmin + (xmax - xmin) * (static_cast<double>(i) / (nx - 1));
  }
  double node_y(int j) const {
    return ymin + (ymax - ymin) * (static_cast<double>(j) / (ny - 1));
  }
  double& at(int i, int j) { return u[static_cast<std::size_t>(j) * nx + i]; }
  double at(int i, int j) const {
    return u[static_cast<std::size_t>(j) * nx + i];
  }

  double value(double x, double y) const {
    const double slack = 1e-9;
    if (x < xmin - slack || x > xmax + slack || y < ymin - slack ||
        y > ymax + slack)
      throw GeometryError("field query outside grid");
    double tx = (x - xmin) / (xmax - xmin) * (nx - 1);
    double ty = (y - ymin) / (ymax - ymin) * (ny - 1);
    int i = std::min(std::max(static_cast<int>(tx), 0), nx - 2);
    int j = std::min(std::max(static_cast<int>(ty), 0), ny - 2);
    const double fx = std::min(std::max(tx - i, 0.0), 1.0);
    const double fy = std::min(std::max(ty - j, 0.0), 1.0);
    return (1 - fx) * (1 - fy) * at(i, j) + fx * (1 - fy) * at(i + 1, j) +
           (1 - fx) * fy * at(i, j + 1) + fx * fy * at(i + 1, j + 1);
  }

  void save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "x,y,u\n";
    char line[96];
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", node_x(i),
                      node_y(j), at(i, j));
        out << line;
      }
  }

  void save_binary(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    const char magic[4] = {'H', 'C', 'F', '2'};
    out.write(magic, 4);
    const std::int32_t dims[2] = {nx, ny};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    const double bounds[4] = {xmin, xmax, ymin, ymax};
    out.write(reinterpret_cast<const char*>(bounds), sizeof bounds);
    out.write(reinterpret_cast<const char*>(u.data()),
              static_cast<std::streamsize>(u.size() * sizeof(double)));
  }

  static Field2D load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || magic[0] != 'H' || magic[1] != 'C' || magic[2] != 'F' ||
        magic[3] != '2')
      throw ConfigError(path + ": not a field file");
    std::int32_t dims[2];
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    double bounds[4];
    in.read(reinterpret_cast<char*>(bounds), sizeof bounds);
    if (!in || dims[0] < 2 || dims[1] < 2)
      throw ConfigError(path + ": corrupt field header");
    Field2D f;
    f.nx = dims[0];
    f.ny = dims[1];
    f.xmin = bounds[0];
    f.xmax = bounds[1];
    f.ymin = bounds[2];
    f.ymax = bounds[3];
    f.u.resize(static_cast<std::size_t>(f.nx) * f.ny);
    in.read(reinterpret_cast<char*>(f.u.data()),
            static_cast<std::streamsize>(f.u.size() * sizeof(double)));
    if (!in) throw ConfigError(path + ": truncated field data");
    return f;
  }
};

struct ReferenceReport {
  int iterations = 0;
  double residual = 0.0;  // relative, at exit
  std::vector<double> history;
};

namespace detail {

// Node-placement map: inverse CDF of the density rho(x) = max(1,
// (span/max(d,floor))^exponent), d = distance to the nearest anchor. The
// density is integrated once on a fixed lattice, so the map is identical at
// every grid resolution and nested index fractions give nested nodes.
struct GradedMap {
  double lo, hi;
  std::vector<double> cum;
  static constexpr int kCells = 1 << 15;

  GradedMap(double lo_, double hi_, const std::vector<double>& anchors,
            double span, double exponent, double floor_)
      : lo(lo_), hi(hi_) {
    cum.resize(kCells + 1);
    cum[0] = 0.0;
    const double dx = (hi - lo) / kCells;
    const auto rho = [&](double x) {
      double d = hi - lo;
      for (double a : anchors) d = std::min(d, std::abs(x - a));
      return std::max(1.0, std::pow(span / std::max(d, floor_), exponent));
    };
    for (int c = 0; c < kCells; ++c) {
      const double a = lo + dx * c;
      cum[c + 1] = cum[c] + 0.5 * (rho(a) + rho(a + dx)) * dx;
    }
  }

  double operator()(double xi) const {  // xi in [0,1] -> [lo,hi]
    if (xi <= 0.0) return lo;
    if (xi >= 1.0) return hi;
    const double target = xi * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), target);
    const int c = std::max(0, static_cast<int>(it - cum.begin()) - 1);
    const double t = (target - cum[c]) / (cum[c + 1] - cum[c]);
    return lo + (hi - lo) / kCells * (c + t);
  }
};

inline constexpr double kGradeSpan = 0.4;
inline constexpr double kGradeExponent = 0.5;
inline constexpr double kGradeFloor = 3e-4;

}  // namespace detail

// Structured triangulation fitted to the interface. Exposed so tests can
// reassemble the same discretization independently.
struct ReferenceMesh {
  int nx = 0, ny = 0;
  std::vector<double> xs, ys;    // graded tensor lines
  std::vector<double> X, Y;      // node coordinates after the row shift
  std::vector<char> dirichlet;   // boundary nodes with prescribed value
  std::vector<double> bc_value;  // that value (0 for free nodes)
  std::vector<int> shifted_col;  // per row, column moved onto the interface

  std::size_t id(int i, int j) const {
    return static_cast<std::size_t>(j) * nx + i;
  }

  static ReferenceMesh build(const Problem2D& p, int nx, int ny) {
    if (nx < 4 || ny < 3) throw ConfigError("reference mesh too small");
    ReferenceMesh m;
    m.nx = nx;
    m.ny = ny;
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    m.X.resize(n);
    m.Y.resize(n);
    m.dirichlet.assign(n, 0);
    m.bc_value.assign(n, 0.0);
    m.shifted_col.resize(ny);
    m.xs.resize(nx);
    m.ys.resize(ny);
    const detail::GradedMap gx(p.xmin, p.xmax, {p.x_bottom, p.x_top},
                               detail::kGradeSpan, detail::kGradeExponent,
                               detail::kGradeFloor);
    const detail::GradedMap gy(p.ymin, p.ymax, {p.ymin, p.ymax},
                               detail::kGradeSpan, detail::kGradeExponent,
                               detail::kGradeFloor);
    for (int i = 0; i < nx; ++i)
      m.xs[i] = gx(static_cast<double>(i) / (nx - 1));
    for (int j = 0; j < ny; ++j)
      m.ys[j] = gy(static_cast<double>(j) / (ny - 1));
    for (int j = 0; j < ny; ++j) {
      const double y = m.ys[j];
      const double t = (y - p.ymin) / (p.ymax - p.ymin);
      const double xc = p.x_bottom + (p.x_top - p.x_bottom) * t;
      int mc = static_cast<int>(
          std::lower_bound(m.xs.begin(), m.xs.end(), xc) - m.xs.begin());
      if (mc > 0 && xc - m.xs[mc - 1] < m.xs[mc] - xc) --mc;
      mc = std::clamp(mc, 1, nx - 2);
      m.shifted_col[j] = mc;
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = m.id(i, j);
        m.X[k] = i == mc ? xc : m.xs[i];
        m.Y[k] = y;
      }
    }
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        if (i != 0 && i != nx - 1 && j != 0 && j != ny - 1) continue;
        const std::size_t k = m.id(i, j);
        // On-line boundary nodes belong to the Dirichlet side, matching the
        // half-open subdomain rule.
        if (p.signed_normal_distance(m.X[k], m.Y[k]) < 1e-9) {
          m.dirichlet[k] = 1;
          m.bc_value[k] = p.boundary_condition(m.X[k], m.Y[k]).value;
        }
      }
    return m;
  }
};

namespace detail {

struct SparseSystem {
  std::vector<int> ptr, col;
  std::vector<double> val, diag, rhs;
};

// Standard P1 stiffness assembly, one-point (centroid) quadrature for kappa
// and the load. Every quad cell is split along its SW-NE diagonal, which is
// what makes the shifted interface a union of element edges. Dirichlet rows
// become identity rows with the value on the right-hand side.
inline SparseSystem assemble(const Problem2D& p, const ReferenceMesh& m) {
  const std::size_t n = static_cast<std::size_t>(m.nx) * m.ny;
  std::vector<std::map<int, double>> rows(n);
  std::vector<double> b(n, 0.0);
  const auto add_tri = [&](std::size_t a0, std::size_t a1, std::size_t a2) {
    const double xa = m.X[a0], ya = m.Y[a0], xb = m.X[a1], yb = m.Y[a1],
                 xc = m.X[a2], yc = m.Y[a2];
    const double area2 = (xb - xa) * (yc - ya) - (xc - xa) * (yb - ya);
    const double cx = (xa + xb + xc) / 3, cy = (ya + yb + yc) / 3;
    const double kap = p.kappa_at(cx, cy);
    const double bg[3] = {yb - yc, yc - ya, ya - yb};
    const double cg[3] = {xc - xb, xa - xc, xb - xa};
    const std::size_t v[3] = {a0, a1, a2};
    const double load = p.source(cx, cy) * area2 / 6.0;
    for (int r = 0; r < 3; ++r) {
      if (m.dirichlet[v[r]]) continue;
      b[v[r]] += load;
      for (int c = 0; c < 3; ++c) {
        const double entry =
            kap * (bg[r] * bg[c] + cg[r] * cg[c]) / (2.0 * area2);
        if (m.dirichlet[v[c]])
          b[v[r]] -= entry * m.bc_value[v[c]];
        else
          rows[v[r]][static_cast<int>(v[c])] += entry;
      }
    }
  };
  for (int j = 0; j + 1 < m.ny; ++j)
    for (int i = 0; i + 1 < m.nx; ++i) {
      add_tri(m.id(i, j), m.id(i + 1, j), m.id(i + 1, j + 1));
      add_tri(m.id(i, j), m.id(i + 1, j + 1), m.id(i, j + 1));
    }
  for (std::size_t k = 0; k < n; ++k)
    if (m.dirichlet[k]) {
      rows[k][static_cast<int>(k)] = 1.0;
      b[k] = m.bc_value[k];
    }
  SparseSystem s;
  s.ptr.resize(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k)
    s.ptr[k + 1] = s.ptr[k] + static_cast<int>(rows[k].size());
  s.col.resize(s.ptr[n]);
  s.val.resize(s.ptr[n]);
  s.diag.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    int o = s.ptr[k];
    for (const auto& [c, v] : rows[k]) {
      s.col[o] = c;
      s.val[o] = v;
      ++o;
    }
    s.diag[k] = rows[k][static_cast<int>(k)];
  }
  s.rhs = std::move(b);
  return s;
}

inline std::vector<double> pcg(const SparseSystem& s, double tol, int maxit,
                               ReferenceReport& rep) {
  const std::size_t n = s.diag.size();
  std::vector<double> x(n, 0.0), r(s.rhs), z(n), pv(n), q(n);
  double bn = 0.0;
  for (double v : r) bn += v * v;
  bn = std::sqrt(bn);
  rep.iterations = 0;
  rep.residual = 0.0;
  if (bn == 0.0) return x;
  for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / s.diag[k];
  pv = z;
  double rho = 0.0;
  for (std::size_t k = 0; k < n; ++k) rho += r[k] * z[k];
  for (int it = 1; it <= maxit; ++it) {
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int o = s.ptr[k]; o < s.ptr[k + 1]; ++o)
        acc += s.val[o] * pv[s.col[o]];
      q[k] = acc;
    }
    double pq = 0.0;
    for (std::size_t k = 0; k < n; ++k) pq += pv[k] * q[k];
    const double alpha = rho / pq;
    double rn = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * pv[k];
      r[k] -= alpha * q[k];
      rn += r[k] * r[k];
    }
    const double rel = std::sqrt(rn) / bn;
    rep.history.push_back(rel);
    rep.iterations = it;
    rep.residual = rel;
    if (!std::isfinite(rel))
      throw SolverError("reference solve diverged at iteration " +
                        std::to_string(it));
    if (rel <= tol) return x;
    double rho2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      z[k] = r[k] / s.diag[k];
      rho2 += r[k] * z[k];
    }
    const double beta = rho2 / rho;
    rho = rho2;
    for (std::size_t k = 0; k < n; ++k) pv[k] = z[k] + beta * pv[k];
  }
  std::string tail;
  const std::size_t from =
      rep.history.size() - std::min<std::size_t>(rep.history.size(), 5);
  for (std::size_t k = from; k < rep.history.size(); ++k)
    tail += " " + std::to_string(rep.history[k]);
  throw SolverError("reference solve: no convergence after " +
                    std::to_string(rep.iterations) +
                    " iterations; residual tail:" + tail);
}

// Exact piecewise-linear evaluation on the shifted mesh. Cells are
// trapezoids with horizontal top and bottom; the left cell border at a given
// height interpolates between the two row node positions, and is increasing
// in the column index, so a binary search finds the column.
inline double mesh_value(const ReferenceMesh& m, const std::vector<double>& u,
                         double x, double y) {
  int j = static_cast<int>(
      std::upper_bound(m.ys.begin(), m.ys.end(), y) - m.ys.begin() - 1);
  j = std::clamp(j, 0, m.ny - 2);
  const double ty =
      std::clamp((y - m.ys[j]) / (m.ys[j + 1] - m.ys[j]), 0.0, 1.0);
  const auto border = [&](int i) {
    return (1 - ty) * m.X[m.id(i, j)] + ty * m.X[m.id(i, j + 1)];
  };
  int lo = 0, hi = m.nx - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (border(mid) <= x ? lo : hi) = mid;
  }
  const int i = std::clamp(lo, 0, m.nx - 2);
  const std::size_t a = m.id(i, j), b = m.id(i + 1, j), c = m.id(i + 1, j + 1),
                    d = m.id(i, j + 1);
  // SW-NE diagonal a-c, matching the assembly split.
  const auto orient = [&](std::size_t p0, std::size_t p1) {
    return (m.X[p1] - m.X[p0]) * (y - m.Y[p0]) -
           (x - m.X[p0]) * (m.Y[p1] - m.Y[p0]);
  };
  std::size_t v0 = a, v1 = b, v2 = c;
  if (orient(a, c) > 0.0) {
    v1 = c;
    v2 = d;
  }
  const double x0 = m.X[v0], y0 = m.Y[v0], x1 = m.X[v1], y1 = m.Y[v1],
               x2 = m.X[v2], y2 = m.Y[v2];
  const double area2 = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
  double l1 = ((x - x0) * (y2 - y0) - (x2 - x0) * (y - y0)) / area2;
  double l2 = ((x1 - x0) * (y - y0) - (x - x0) * (y1 - y0)) / area2;
  l1 = std::clamp(l1, 0.0, 1.0);
  l2 = std::clamp(l2, 0.0, 1.0);
  const double l0 = std::max(0.0, 1.0 - l1 - l2);
  return l0 * u[v0] + l1 * u[v1] + l2 * u[v2];
}

}  // namespace detail

// Solves the problem on an nx-by-ny node mesh (so (nx-1)x(ny-1) cells) and
// returns the solution sampled on the uniform nx-by-ny grid. Minimum
// resolution 64x32 cells.
inline Field2D reference_solution(const Problem2D& p, int nx, int ny,
                                  ReferenceReport* report = nullptr,
                                  double tol = 1e-10) {
  if (nx - 1 < 64 || ny - 1 < 32)
    throw ConfigError("reference_solution needs at least 64x32 cells");
  for (const auto& s : p.boundary)
    if (s.type == BcType::Neumann && s.value != 0.0)
      throw ConfigError(
          "reference_solution supports homogeneous Neumann data only");
  const ReferenceMesh mesh = ReferenceMesh::build(p, nx, ny);
  const detail::SparseSystem sys = detail::assemble(p, mesh);
  ReferenceReport rep;
  const std::vector<double> u = detail::pcg(sys, tol, 20000, rep);
  Field2D f;
  f.nx = nx;
  f.ny = ny;
  f.xmin = p.xmin;
  f.xmax = p.xmax;
  f.ymin = p.ymin;
  f.ymax = p.ymax;
  f.u.resize(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      f.at(i, j) = detail::mesh_value(mesh, u, f.node_x(i), f.node_y(j));
  if (report) *report = std::move(rep);
  return f;
}

}  // namespace hcpinn
