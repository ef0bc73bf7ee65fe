#pragma once

// Truncated Taylor scalars ("jets") carrying value, first and second
// derivative with respect to a single sweep variable. Seeding the sweep
// variable along a coordinate axis gives exact pure second derivatives;
// seeding along a unit direction gives directional first/second derivatives.
// Mixed partials are never needed by the solvers, so per-axis sweeps suffice.
//
// Jet2<double> evaluates plainly; Jet2<Rev> runs the same arithmetic over
// reverse-mode scalars, which is how parameter gradients flow through
// expressions that contain spatial derivatives.

#include <cmath>
#include <type_traits>

#include "errors.hpp"
#include "tape.hpp"

namespace hcpinn::ad {

inline double value_of(double x) { return x; }
inline double value_of(const Rev& x) { return x.v; }

inline double pow_int(double x, int n) { return std::pow(x, n); }

template <class S>
struct Jet2 {
  S v{};
  S d1{};
  S d2{};
};

using Jet2d = Jet2<double>;
using Jet2r = Jet2<Rev>;

template <class S>
Jet2<S> jet_var(S x) {
  return {x, S(1.0), S(0.0)};
}
template <class S>
Jet2<S> jet_const(S c) {
  return {c, S(0.0), S(0.0)};
}
template <class S>
Jet2<S> make_jet(S v, S d1, S d2) {
  return {v, d1, d2};
}

template <class S>
Jet2<S> operator+(const Jet2<S>& a, const Jet2<S>& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
template <class S>
Jet2<S> operator-(const Jet2<S>& a, const Jet2<S>& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
template <class S>
Jet2<S> operator-(const Jet2<S>& a) {
  return {-a.v, -a.d1, -a.d2};
}
template <class S>
Jet2<S> operator*(const Jet2<S>& a, const Jet2<S>& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1,
          a.d2 * b.v + (a.d1 * b.d1) * S(2.0) + a.v * b.d2};
}
template <class S>
Jet2<S> operator/(const Jet2<S>& a, const Jet2<S>& b) {
  if (value_of(b.v) == 0.0) throw EvalError("jet division by zero");
  const S q = a.v / b.v;
  const S q1 = (a.d1 - q * b.d1) / b.v;
  const S q2 = (a.d2 - q1 * b.d1 * S(2.0) - q * b.d2) / b.v;
  return {q, q1, q2};
}

template <class S>
Jet2<S> operator+(const Jet2<S>& a, std::type_identity_t<S> c) {
  return {a.v + c, a.d1, a.d2};
}
template <class S>
Jet2<S> operator+(std::type_identity_t<S> c, const Jet2<S>& a) {
  return a + c;
}
template <class S>
Jet2<S> operator-(const Jet2<S>& a, std::type_identity_t<S> c) {
  return {a.v - c, a.d1, a.d2};
}
template <class S>
Jet2<S> operator-(std::type_identity_t<S> c, const Jet2<S>& a) {
  return {c - a.v, -a.d1, -a.d2};
}
template <class S>
Jet2<S> operator*(const Jet2<S>& a, std::type_identity_t<S> c) {
  return {a.v * c, a.d1 * c, a.d2 * c};
}
template <class S>
Jet2<S> operator*(std::type_identity_t<S> c, const Jet2<S>& a) {
  return a * c;
}
template <class S>
Jet2<S> operator/(const Jet2<S>& a, std::type_identity_t<S> c) {
  if (value_of(c) == 0.0) throw EvalError("jet division by zero");
  return {a.v / c, a.d1 / c, a.d2 / c};
}

namespace detail {
// Chain rule for f(u): needs f, f' and f'' at u.v.
template <class S>
Jet2<S> compose(const Jet2<S>& u, S f0, S f1, S f2) {
  return {f0, f1 * u.d1, f1 * u.d2 + f2 * u.d1 * u.d1};
}
}  // namespace detail

template <class S>
Jet2<S> tanh(const Jet2<S>& u) {
  using std::tanh;
  const S t = tanh(u.v);
  const S s = S(1.0) - t * t;
  return detail::compose(u, t, s, S(-2.0) * t * s);
}

template <class S>
Jet2<S> sigmoid(const Jet2<S>& u) {
  using std::exp;
  const S s = S(1.0) / (S(1.0) + exp(-u.v));
  const S s1 = s * (S(1.0) - s);
  return detail::compose(u, s, s1, s1 * (S(1.0) - S(2.0) * s));
}

// swish(x) = silu(x) = x * sigmoid(x)
template <class S>
Jet2<S> silu(const Jet2<S>& u) {
  return u * sigmoid(u);
}

template <class S>
Jet2<S> exp(const Jet2<S>& u) {
  using std::exp;
  const S e = exp(u.v);
  return detail::compose(u, e, e, e);
}

template <class S>
Jet2<S> erf(const Jet2<S>& u) {
  using std::erf;
  using std::exp;
  constexpr double two_over_sqrt_pi = 1.1283791670955126;
  const S g = S(two_over_sqrt_pi) * exp(-u.v * u.v);
  return detail::compose(u, erf(u.v), g, S(-2.0) * u.v * g);
}

template <class S>
Jet2<S> sqrt(const Jet2<S>& u) {
  using std::sqrt;
  if (value_of(u.v) <= 0.0) throw EvalError("jet sqrt of non-positive value");
  const S s = sqrt(u.v);
  const S f1 = S(0.5) / s;
  return detail::compose(u, s, f1, S(-0.5) * f1 / u.v);
}

template <class S>
Jet2<S> log(const Jet2<S>& u) {
  using std::log;
  if (value_of(u.v) <= 0.0) throw EvalError("jet log of non-positive value");
  const S f1 = S(1.0) / u.v;
  return detail::compose(u, log(u.v), f1, -f1 * f1);
}

template <class S>
Jet2<S> sin(const Jet2<S>& u) {
  using std::cos;
  using std::sin;
  const S s = sin(u.v);
  return detail::compose(u, s, S(cos(u.v)), -s);
}

template <class S>
Jet2<S> cos(const Jet2<S>& u) {
  using std::cos;
  using std::sin;
  const S c = cos(u.v);
  return detail::compose(u, c, -S(sin(u.v)), -c);
}

template <class S>
Jet2<S> pow_int(const Jet2<S>& u, int n) {
  if (n == 0) return jet_const(S(1.0));
  if (n == 1) return u;
  const S pv = pow_int(u.v, n);
  const S p1 = S(static_cast<double>(n)) * pow_int(u.v, n - 1);
  const S p2 =
      S(static_cast<double>(n) * (n - 1)) * pow_int(u.v, n - 2);
  return detail::compose(u, pv, p1, p2);
}

// |u| with the kink rule: evaluating the derivative at u = 0 is an error.
template <class S>
Jet2<S> abs(const Jet2<S>& u) {
  const double uv = value_of(u.v);
  if (uv == 0.0) throw EvalError("|x| jet at its kink (x = 0)");
  return uv > 0.0 ? u : -u;
}

// atan2 of two jets sharing one sweep variable.
template <class S>
Jet2<S> atan2(const Jet2<S>& y, const Jet2<S>& x) {
  using std::atan2;
  const S r2 = x.v * x.v + y.v * y.v;
  if (value_of(r2) == 0.0) throw EvalError("jet atan2 at the origin");
  const S n1 = x.v * y.d1 - y.v * x.d1;
  const S n2 = x.v * y.d2 - y.v * x.d2;
  const S r2p = (x.v * x.d1 + y.v * y.d1) * S(2.0);
  const S t1 = n1 / r2;
  return {atan2(y.v, x.v), t1, (n2 - t1 * r2p) / r2};
}

// Value/derivatives of a univariate callable at x0, via a single jet sweep.
template <class F>
Jet2d eval_jet2(F&& f, double x0) {
  return f(jet_var(x0));
}

}  // namespace hcpinn::ad
