#pragma once

// One-dimensional piecewise-diffusivity benchmark problems and their
// analytic reference solutions.
//
//   -d/dx ( kappa(x) du/dx ) = f(x),  x in [0, 1]
//
// kappa is constant per subdomain and jumps at interior interface points.
// Each named constructor builds the closed-form solution, then self-checks
// it: PDE residual on a sample grid, boundary residuals, and interface
// value/flux continuity. A failing self-check throws, so a constructed
// problem always carries a trustworthy oracle.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"
#include "linalg.hpp"

namespace hcpinn {

enum class BcType { Dirichlet, Neumann };

struct BoundaryCondition1D {
  BcType type;
  double value;  // u for Dirichlet, du/dx for Neumann
};

struct Problem1D {
  std::string name;
  std::vector<double> breaks;  // subdomain edges, size M+1, includes 0 and 1
  std::vector<double> kappa;   // size M
  BoundaryCondition1D left, right;
  std::function<double(double)> source;
  // Reference solution as a jet (value, u', u'') with a side flag for
  // evaluation exactly on an interface: negative side = subdomain below.
  std::function<ad::Jet2d(double, int)> oracle_jet;
  // Prescribed interface jumps, one per interface:
  //   value_jump = u_above - u_below, flux_jump = (kappa u')_above - below.
  std::vector<double> value_jump, flux_jump;

  std::size_t subdomains() const { return kappa.size(); }
  std::vector<double> interfaces() const {
    return {breaks.begin() + 1, breaks.end() - 1};
  }
  // Subdomain containing x; points exactly on an interface belong to the
  // upper side unless `side` < 0.
  std::size_t subdomain_of(double x, int side = 0) const {
    if (x < breaks.front() || x > breaks.back())
      throw GeometryError("point outside domain");
    std::size_t m = 0;
    while (m + 1 < kappa.size() && x >= breaks[m + 1]) ++m;
    if (side < 0 && m > 0 && x == breaks[m]) --m;
    return m;
  }
  double kappa_at(double x, int side = 0) const {
    return kappa[subdomain_of(x, side)];
  }
  double oracle(double x, int side = 0) const { return oracle_jet(x, side).v; }
};

namespace detail {

// Shared self-check for a freshly constructed analytic solution.
inline void self_check_problem(const Problem1D& p, double residual_tol,
                               double bc_tol) {
  const int samples = 101;
  for (int i = 0; i < samples; ++i) {
    const double x =
        (static_cast<double>(i) + 0.5) / samples;  // avoids interfaces
    const auto u = p.oracle_jet(x, 0);
    const double kap = p.kappa_at(x);
    const double r = -kap * u.d2 - p.source(x);
    if (std::abs(r) > residual_tol)
      throw SolverError(p.name + " oracle self-check: PDE residual " +
                        std::to_string(r) + " at x=" + std::to_string(x));
  }
  const auto check_bc = [&](double x, const BoundaryCondition1D& bc, int side) {
    const auto u = p.oracle_jet(x, side);
    const double r =
        bc.type == BcType::Dirichlet ? u.v - bc.value : u.d1 - bc.value;
    if (std::abs(r) > bc_tol)
      throw SolverError(p.name + " oracle self-check: boundary residual " +
                        std::to_string(r));
  };
  check_bc(p.breaks.front(), p.left, 1);
  check_bc(p.breaks.back(), p.right, -1);
  const auto itf = p.interfaces();
  for (std::size_t j = 0; j < itf.size(); ++j) {
    const auto lo = p.oracle_jet(itf[j], -1);
    const auto hi = p.oracle_jet(itf[j], 1);
    const double vjump = p.value_jump.empty() ? 0.0 : p.value_jump[j];
    const double fjump = p.flux_jump.empty() ? 0.0 : p.flux_jump[j];
    const double dv = (hi.v - lo.v) - vjump;
    const double df =
        (p.kappa[j + 1] * hi.d1 - p.kappa[j] * lo.d1) - fjump;
    if (std::abs(dv) > bc_tol || std::abs(df) > bc_tol)
      throw SolverError(p.name + " oracle self-check: interface mismatch");
  }
}

}  // namespace detail

// Problem 1: single interface at 0.5, kappa = (0.1, 1), f = 1,
// u(0) = u(1) = 0. Piecewise quadratic; the four free coefficients solve a
// 4x4 system (two boundary rows, value continuity, flux continuity).
inline Problem1D problem1(double kappa1 = 0.1, double kappa2 = 1.0,
                          double x_itf = 0.5) {
  Problem1D p;
  p.name = "p1";
  p.breaks = {0.0, x_itf, 1.0};
  p.kappa = {kappa1, kappa2};
  p.left = {BcType::Dirichlet, 0.0};
  p.right = {BcType::Dirichlet, 0.0};
  p.source = [](double) { return 1.0; };

  // u_m(x) = -x^2/(2 kappa_m) + a_m x + b_m, unknowns (a1, b1, a2, b2).
  la::Matrix A(4, 4);
  std::vector<double> b(4);
  A(0, 1) = 1.0;  // u(0) = 0
  b[0] = 0.0;
  A(1, 2) = 1.0;  // u(1) = 0
  A(1, 3) = 1.0;
  b[1] = 1.0 / (2.0 * kappa2);
  A(2, 0) = x_itf;  // value continuity at the interface
  A(2, 1) = 1.0;
  A(2, 2) = -x_itf;
  A(2, 3) = -1.0;
  b[2] = x_itf * x_itf / (2.0 * kappa1) - x_itf * x_itf / (2.0 * kappa2);
  A(3, 0) = kappa1;  // flux continuity: kappa1 a1 = kappa2 a2
  A(3, 2) = -kappa2;
  b[3] = 0.0;
  const auto c = la::solve(A, b);

  p.oracle_jet = [x_itf, kappa1, kappa2, c](double x, int side) {
    const bool lower = x < x_itf || (x == x_itf && side < 0);
    const double kap = lower ? kappa1 : kappa2;
    const double a = lower ? c[0] : c[2];
    const double bb = lower ? c[1] : c[3];
    return ad::Jet2d{-x * x / (2.0 * kap) + a * x + bb, -x / kap + a,
                     -1.0 / kap};
  };
  detail::self_check_problem(p, 1e-12, 1e-12);
  return p;
}

// Problem 2: three interfaces at 0.25, 0.5, 0.75 with per-strip
// conductivities, f = 1, u(0) = u(1) = 0. Closed-form coefficients.
inline Problem1D problem2(std::vector<double> kappas = {1.0, 0.1, 1.0, 0.1}) {
  if (kappas.size() != 4) throw ConfigError("problem 2 needs four conductivities");
  Problem1D p;
  p.name = "p2";
  p.breaks = {0.0, 0.25, 0.5, 0.75, 1.0};
  p.kappa = kappas;
  p.left = {BcType::Dirichlet, 0.0};
  p.right = {BcType::Dirichlet, 0.0};
  p.source = [](double) { return 1.0; };

  const double k1 = kappas[0], k2 = kappas[1], k3 = kappas[2], k4 = kappas[3];
  const double K = k1 * k2 * k3 + k1 * k2 * k4 + k1 * k3 * k4 + k2 * k3 * k4;
  const double c1 = (7.0 / 8.0) * k1 * k2 * k3 + (5.0 / 8.0) * k1 * k2 * k4 +
                    (3.0 / 8.0) * k1 * k3 * k4 + (1.0 / 8.0) * k2 * k3 * k4;
  const double c3 = -(3.0 / 16.0) * k1 * k2 * k3 - (1.0 / 8.0) * k1 * k2 * k4 -
                    (1.0 / 16.0) * k1 * k3 * k4 + (3.0 / 16.0) * k2 * k2 * k3 +
                    (1.0 / 8.0) * k2 * k2 * k4 + (1.0 / 16.0) * k2 * k3 * k4;
  const double c5 = -(5.0 / 16.0) * k1 * k2 * k3 - (3.0 / 16.0) * k1 * k2 * k4 +
                    (1.0 / 8.0) * k1 * k3 * k3 + (3.0 / 16.0) * k2 * k3 * k3 +
                    (3.0 / 16.0) * k2 * k3 * k4;
  const double c7 = -(3.0 / 8.0) * k1 * k2 * k3 - (1.0 / 8.0) * k1 * k2 * k4 +
                    (1.0 / 8.0) * k1 * k3 * k4 + (3.0 / 8.0) * k2 * k3 * k4;
  // Same slope numerator in every strip (that is what flux continuity says);
  // constant terms differ per strip.
  const std::vector<double> slope = {c1, c1, c1, c1};
  const std::vector<double> offset = {0.0, c3, c5, c7};

  p.oracle_jet = [kappas, K, slope, offset, breaks = p.breaks](double x,
                                                               int side) {
    std::size_t m = 0;
    while (m + 1 < kappas.size() && x >= breaks[m + 1]) ++m;
    if (side < 0 && m > 0 && x == breaks[m]) --m;
    const double k = kappas[m];
    return ad::Jet2d{-x * x / (2.0 * k) + slope[m] * x / (K * k) +
                         offset[m] / (K * k),
                     -x / k + slope[m] / (K * k), -1.0 / k};
  };
  detail::self_check_problem(p, 1e-12, 1e-12);
  return p;
}

// Problem 3: interface at 0.5, kappa = (0.1, 1), mixed boundary conditions
// u'(0) = 0 and u(1) = 0. The source is constant f0 on the left and a
// Gaussian bump on the right:
//   f(x) = f0                                   x < 0.5
//   f(x) = a exp(-(x - xc)^2 / w^2)             x >= 0.5
// The right branch uses the double antiderivative
//   F(x) = (a w sqrt(pi) / (2 kappa2)) (x - xc) erf((x - xc)/w)
//        + (a w^2 / (2 kappa2)) exp(-(x - xc)^2/w^2),
// which satisfies F'' = +f/kappa2, so the PDE-consistent branch is
// u = -F(x) + c3 x / kappa2 + c4 (note the minus sign).
inline Problem1D problem3(double kappa1 = 0.1, double kappa2 = 1.0,
                          double f0 = -0.05, double a = 1.0, double xc = 0.75,
                          double w = 0.1) {
  Problem1D p;
  p.name = "p3";
  const double xi = 0.5;
  p.breaks = {0.0, xi, 1.0};
  p.kappa = {kappa1, kappa2};
  p.left = {BcType::Neumann, 0.0};
  p.right = {BcType::Dirichlet, 0.0};
  p.source = [f0, a, xc, w, xi](double x) {
    if (x < xi) return f0;
    const double d = (x - xc) / w;
    return a * std::exp(-d * d);
  };

  constexpr double sqrt_pi = 1.7724538509055160273;
  const auto F = [=](double x) {
    const double d = (x - xc) / w;
    return a * w * sqrt_pi / (2.0 * kappa2) * (x - xc) * std::erf(d) +
           a * w * w / (2.0 * kappa2) * std::exp(-d * d);
  };
  const auto Fx = [=](double x) {
    return a * w * sqrt_pi / (2.0 * kappa2) * std::erf((x - xc) / w);
  };
  const auto Fxx = [=](double x) {
    const double d = (x - xc) / w;
    return a / kappa2 * std::exp(-d * d);
  };

  // Unknowns (c1, c2, c3, c4):
  //   u_left  = -f0 x^2 / (2 kappa1) + c1 x / kappa1 + c2
  //   u_right = -F(x) + c3 x / kappa2 + c4
  la::Matrix A(4, 4);
  std::vector<double> b(4);
  A(0, 0) = 1.0;  // u'(0) = 0  ->  c1 = 0
  b[0] = 0.0;
  A(1, 2) = 1.0 / kappa2;  // u(1) = 0
  A(1, 3) = 1.0;
  b[1] = F(1.0);
  A(2, 0) = xi / kappa1;  // value continuity
  A(2, 1) = 1.0;
  A(2, 2) = -xi / kappa2;
  A(2, 3) = -1.0;
  b[2] = f0 * xi * xi / (2.0 * kappa1) - F(xi);
  A(3, 0) = 1.0;  // flux continuity: -f0 xi + c1 = -kappa2 Fx(xi) + c3
  A(3, 2) = -1.0;
  b[3] = f0 * xi - kappa2 * Fx(xi);
  const auto c = la::solve(A, b);

  p.oracle_jet = [=](double x, int side) {
    const bool lower = x < xi || (x == xi && side < 0);
    if (lower) {
      return ad::Jet2d{-f0 * x * x / (2.0 * kappa1) + c[0] * x / kappa1 + c[1],
                       -f0 * x / kappa1 + c[0] / kappa1, -f0 / kappa1};
    }
    return ad::Jet2d{-F(x) + c[2] * x / kappa2 + c[3], -Fx(x) + c[2] / kappa2,
                     -Fxx(x)};
  };
  // erf/exp evaluations keep this near machine precision but not exactly at
  // it; the PDE tolerance follows the module contract.
  detail::self_check_problem(p, 1e-8, 1e-12);
  return p;
}

// Relative L2 error over paired samples. A zero-norm reference is an error.
inline double relative_l2(std::span<const double> pred,
                          std::span<const double> ref) {
  if (pred.size() != ref.size() || ref.empty())
    throw ContractError("relative_l2 needs equal-length non-empty vectors");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    num += (pred[i] - ref[i]) * (pred[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  if (den == 0.0) throw ContractError("relative_l2 against a zero reference");
  return std::sqrt(num / den);
}

}  // namespace hcpinn
