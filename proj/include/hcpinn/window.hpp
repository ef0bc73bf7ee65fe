#pragma once

// Compact-support window shape functions on the unit coordinate tau in [0, 1].
//
// Three families, each the minimal-degree polynomial satisfying a Hermite
// constraint table at tau = 0 (the node) and tau = 1 (the support edge),
// with smoothness order k in {1, 2, 3}:
//
//   interior:  w(0) = 1, w^(1..k)(0) = 0,  w(1) = 0, w'(1) = 0
//   value:     w(0) = 1, w'(0) = 0,        w^(0..k)(1) = 0
//   slope:     w(0) = 0, w'(0) = 1,        w^(0..k)(1) = 0
//
// "value" windows carry Dirichlet data, "slope" windows carry Neumann/flux
// data. The tables are solved at runtime by pivoted elimination; the closed
// forms (e.g. 1 - 3t^2 + 2t^3) act as frozen oracles in the test suite.
//
// Physical-coordinate evaluation maps x to tau = |x - c| / dx. A slope
// window is extended oddly about its node: W(x) = sign(x-c) dx w(|x-c|/dx).
// On each side this equals the -sign(n) dx w(tau) form with n the outward
// normal of the subdomain containing x, and it gives the window unit slope
// at the node from both sides, which is what makes flux terms continuous
// across an interface.

#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"
#include "linalg.hpp"
#include "polynomial.hpp"

namespace hcpinn {

enum class WindowKind { Interior, Value, Slope };

namespace detail {
// d^m/dt^m t^j evaluated at t (falling factorial times power).
inline double monomial_derivative(int j, int m, double t) {
  if (m > j) return 0.0;
  double f = 1.0;
  for (int i = 0; i < m; ++i) f *= static_cast<double>(j - i);
  return f * std::pow(t, j - m);
}
}  // namespace detail

// Builds the minimal-degree window polynomial for the given family and
// smoothness order. Throws ConfigError for k outside {1, 2, 3}.
inline Polynomial window_shape(WindowKind kind, int k) {
  if (k < 1 || k > 3) throw ConfigError("window smoothness order must be 1, 2, or 3");

  struct Row {
    double t;
    int order;
    double rhs;
  };
  std::vector<Row> rows;
  switch (kind) {
    case WindowKind::Interior:
      rows.push_back({0.0, 0, 1.0});
      for (int m = 1; m <= k; ++m) rows.push_back({0.0, m, 0.0});
      rows.push_back({1.0, 0, 0.0});
      rows.push_back({1.0, 1, 0.0});
      break;
    case WindowKind::Value:
      rows.push_back({0.0, 0, 1.0});
      rows.push_back({0.0, 1, 0.0});
      for (int m = 0; m <= k; ++m) rows.push_back({1.0, m, 0.0});
      break;
    case WindowKind::Slope:
      rows.push_back({0.0, 0, 0.0});
      rows.push_back({0.0, 1, 1.0});
      for (int m = 0; m <= k; ++m) rows.push_back({1.0, m, 0.0});
      break;
  }

  const std::size_t n = rows.size();
  la::Matrix a(n, n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      a(i, j) = detail::monomial_derivative(static_cast<int>(j), rows[i].order,
                                            rows[i].t);
    b[i] = rows[i].rhs;
  }
  auto c = la::solve(a, b);
  // Snap coefficients that are integers up to roundoff; the families are
  // integer-coefficient polynomials and exactness downstream is worth it.
  for (auto& ci : c) {
    const double r = std::round(ci);
    if (std::abs(ci - r) < 1e-11) ci = r;
  }
  return Polynomial(std::move(c));
}

// Which side of a node an evaluation refers to when the point sits exactly
// on the node. Auto picks by sign and refuses the ambiguous case where a
// one-sided quantity (slope-window curvature, per-side conductivity) is
// evaluated exactly at the node.
enum class Side { Auto, Below, Above };

struct WindowSpec {
  WindowKind kind;
  double center;
  double half_width;
};

namespace detail {
template <class S>
int side_sign(const ad::Jet2<S>& t, Side side) {
  const double tv = ad::value_of(t.v);
  if (tv != 0.0) return tv > 0.0 ? 1 : -1;
  switch (side) {
    case Side::Below:
      return -1;
    case Side::Above:
      return 1;
    case Side::Auto:
      break;
  }
  throw EvalError("window evaluated exactly at its node without a side hint");
}
}  // namespace detail

// Evaluates a window in physical coordinates. Outside the closed support the
// result is exactly zero (all jet components). `x` may carry an arbitrary
// seed (axis, direction, or polar sweep); the chain rule is handled by jet
// arithmetic.
template <class S>
ad::Jet2<S> eval_window(const WindowSpec& spec, const Polynomial& shape,
                        const ad::Jet2<S>& x, Side side = Side::Auto) {
  const S inv = S(1.0 / spec.half_width);
  const ad::Jet2<S> t = (x - S(spec.center)) * inv;
  const double tv = ad::value_of(t.v);
  if (std::abs(tv) > 1.0) return ad::jet_const(S(0.0));

  if (spec.kind == WindowKind::Slope) {
    const int s = detail::side_sign(t, side);
    const ad::Jet2<S> tau = t * S(static_cast<double>(s));
    return shape.eval(tau) * S(static_cast<double>(s) * spec.half_width);
  }

  // Even families: at the node the composition with |t| is smooth because
  // w'(0) = 0, so the kink is removable and handled explicitly.
  if (tv == 0.0) {
    const double w0 = shape(0.0);
    const double w2 = shape.derivative_at(0.0, 2);
    const S d2 = S(w2) * (t.d1 * t.d1);
    return {S(w0), S(0.0), d2};
  }
  const ad::Jet2<S> tau = tv > 0.0 ? t : -t;
  return shape.eval(tau);
}

inline bool in_support(const WindowSpec& spec, double x) {
  return std::abs(x - spec.center) <= spec.half_width;
}

}  // namespace hcpinn
