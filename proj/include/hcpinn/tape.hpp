#pragma once

// Reverse-mode automatic differentiation on a Wengert list.
//
// Rev is a scalar carrying its value and a handle into a Tape. Arithmetic
// between Rev values records nodes whose local partials are computed at
// record time, so the backward sweep is a single generic loop. Rev values
// with id < 0 are constants: operations fold them without growing the tape,
// which keeps geometry-only arithmetic (window polynomials, quadrature
// positions, radial basis shapes) off the tape entirely.
//
// The tape supports a chunked reverse sweep: record a shared prefix, mark(),
// then repeatedly record a short suffix, seed its output, propagate down to
// the mark and rewind. Adjoints below the mark accumulate across chunks and
// a final propagate(0) finishes the job. This keeps the live tape small and
// cache-resident during training.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace hcpinn::ad {

enum class Op : std::uint8_t {
  Leaf,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Fma,     // a*b + c
  Axpy,    // k*x + y, k constant
  Scale,   // k*x (+ optional constant)
  Tanh,
  Sigmoid,
  Exp,
  Erf,
  Sqrt,
  Log,
  Sin,
  Cos,
  Atan2,
  PowInt,
  Abs,
};

struct Node {
  std::int32_t p0 = -1, p1 = -1, p2 = -1;
  double d0 = 0.0, d1 = 0.0, d2 = 0.0;
  Op op = Op::Leaf;
};

class Tape;

struct Rev {
  double v = 0.0;
  std::int32_t id = -1;  // < 0: constant, not on any tape
  Tape* tape = nullptr;

  constexpr Rev() = default;
  constexpr Rev(double c) : v(c) {}  // NOLINT: implicit lift of constants
  bool is_const() const { return id < 0; }
};

class Tape {
 public:
  Rev leaf(double v) {
    Rev r;
    r.v = v;
    r.id = push(Op::Leaf, v, -1, 0.0, -1, 0.0, -1, 0.0);
    r.tape = this;
    return r;
  }

  std::size_t size() const { return nodes_.size(); }

  // Drops nodes at and above `mark`, keeping accumulated adjoints below it.
  void rewind(std::size_t mark) {
    nodes_.resize(mark);
    if (adj_.size() > mark) adj_.resize(mark);
  }

  void clear() {
    nodes_.clear();
    adj_.clear();
    first_nan_ = -1;
  }

  void seed(const Rev& y, double w = 1.0) {
    if (y.is_const()) return;  // constant output: nothing depends on inputs
    adj_.resize(nodes_.size(), 0.0);
    adj_[static_cast<std::size_t>(y.id)] += w;
  }

  // Runs the reverse sweep over nodes [floor, size). The caller either
  // rewinds to `floor` afterwards (chunked pattern) or is done (floor == 0).
  void propagate(std::size_t floor = 0) {
    adj_.resize(nodes_.size(), 0.0);
    for (std::size_t i = nodes_.size(); i-- > floor;) {
      const double a = adj_[i];
      if (a == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.p0 >= 0) adj_[static_cast<std::size_t>(n.p0)] += n.d0 * a;
      if (n.p1 >= 0) adj_[static_cast<std::size_t>(n.p1)] += n.d1 * a;
      if (n.p2 >= 0) adj_[static_cast<std::size_t>(n.p2)] += n.d2 * a;
    }
  }

  double adjoint_of(const Rev& x) const {
    if (x.is_const() || static_cast<std::size_t>(x.id) >= adj_.size()) return 0.0;
    return adj_[static_cast<std::size_t>(x.id)];
  }

  // First node whose recorded value was NaN, or -1. Checked after a forward
  // pass to report where a blow-up started.
  int first_nan_node() const { return first_nan_; }
  Op op_of(int id) const { return nodes_[static_cast<std::size_t>(id)].op; }

  std::int32_t push(Op op, double value, std::int32_t p0, double d0,
                    std::int32_t p1, double d1, std::int32_t p2, double d2) {
    Node n;
    n.p0 = p0;
    n.p1 = p1;
    n.p2 = p2;
    n.d0 = d0;
    n.d1 = d1;
    n.d2 = d2;
    n.op = op;
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(n);
    if (first_nan_ < 0 && std::isnan(value)) first_nan_ = id;
    return id;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<double> adj_;
  int first_nan_ = -1;
};

namespace detail {

inline Tape* tape_of(const Rev& a, const Rev& b) {
  return a.is_const() ? b.tape : a.tape;
}

inline Rev record1(Op op, double val, const Rev& a, double da) {
  if (a.is_const()) return Rev(val);
  Rev r;
  r.v = val;
  r.tape = a.tape;
  r.id = a.tape->push(op, val, a.id, da, -1, 0.0, -1, 0.0);
  return r;
}

inline Rev record2(Op op, double val, const Rev& a, double da, const Rev& b,
                   double db) {
  if (a.is_const() && b.is_const()) return Rev(val);
  if (a.is_const()) return record1(op, val, b, db);
  if (b.is_const()) return record1(op, val, a, da);
  Rev r;
  r.v = val;
  r.tape = a.tape;
  r.id = a.tape->push(op, val, a.id, da, b.id, db, -1, 0.0);
  return r;
}

inline Rev record3(Op op, double val, const Rev& a, double da, const Rev& b,
                   double db, const Rev& c, double dc) {
  int consts = (a.is_const() ? 1 : 0) + (b.is_const() ? 1 : 0) + (c.is_const() ? 1 : 0);
  if (consts == 3) return Rev(val);
  if (a.is_const()) return record2(op, val, b, db, c, dc);
  if (b.is_const()) return record2(op, val, a, da, c, dc);
  if (c.is_const()) return record2(op, val, a, da, b, db);
  Rev r;
  r.v = val;
  r.tape = a.tape;
  r.id = a.tape->push(op, val, a.id, da, b.id, db, c.id, dc);
  return r;
}

}  // namespace detail

inline Rev operator+(const Rev& a, const Rev& b) {
  return detail::record2(Op::Add, a.v + b.v, a, 1.0, b, 1.0);
}
inline Rev operator-(const Rev& a, const Rev& b) {
  return detail::record2(Op::Sub, a.v - b.v, a, 1.0, b, -1.0);
}
inline Rev operator-(const Rev& a) {
  return detail::record1(Op::Neg, -a.v, a, -1.0);
}
inline Rev operator*(const Rev& a, const Rev& b) {
  return detail::record2(Op::Mul, a.v * b.v, a, b.v, b, a.v);
}
inline Rev operator/(const Rev& a, const Rev& b) {
  if (b.v == 0.0) throw EvalError("division by zero", b.id);
  const double inv = 1.0 / b.v;
  return detail::record2(Op::Div, a.v * inv, a, inv, b, -a.v * inv * inv);
}
inline Rev& operator+=(Rev& a, const Rev& b) { return a = a + b; }
inline Rev& operator-=(Rev& a, const Rev& b) { return a = a - b; }
inline Rev& operator*=(Rev& a, const Rev& b) { return a = a * b; }
inline Rev& operator/=(Rev& a, const Rev& b) { return a = a / b; }

// a*b + c in a single node. The double overload keeps generic code uniform.
inline Rev fma(const Rev& a, const Rev& b, const Rev& c) {
  return detail::record3(Op::Fma, a.v * b.v + c.v, a, b.v, b, a.v, c, 1.0);
}
inline double fma(double a, double b, double c) { return a * b + c; }

inline Rev tanh(const Rev& a) {
  const double t = std::tanh(a.v);
  return detail::record1(Op::Tanh, t, a, 1.0 - t * t);
}
inline Rev exp(const Rev& a) {
  const double e = std::exp(a.v);
  return detail::record1(Op::Exp, e, a, e);
}
inline Rev sigmoid(const Rev& a) {
  const double s = 1.0 / (1.0 + std::exp(-a.v));
  return detail::record1(Op::Sigmoid, s, a, s * (1.0 - s));
}
inline Rev erf(const Rev& a) {
  constexpr double two_over_sqrt_pi = 1.1283791670955126;
  return detail::record1(Op::Erf, std::erf(a.v), a,
                         two_over_sqrt_pi * std::exp(-a.v * a.v));
}
inline Rev sqrt(const Rev& a) {
  if (a.v <= 0.0) throw EvalError("sqrt of non-positive value", a.id);
  const double s = std::sqrt(a.v);
  return detail::record1(Op::Sqrt, s, a, 0.5 / s);
}
inline Rev log(const Rev& a) {
  if (a.v <= 0.0) throw EvalError("log of non-positive value", a.id);
  return detail::record1(Op::Log, std::log(a.v), a, 1.0 / a.v);
}
inline Rev sin(const Rev& a) {
  return detail::record1(Op::Sin, std::sin(a.v), a, std::cos(a.v));
}
inline Rev cos(const Rev& a) {
  return detail::record1(Op::Cos, std::cos(a.v), a, -std::sin(a.v));
}
inline Rev atan2(const Rev& y, const Rev& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  if (r2 == 0.0) throw EvalError("atan2 at the origin", y.id);
  return detail::record2(Op::Atan2, std::atan2(y.v, x.v), y, x.v / r2, x,
                         -y.v / r2);
}
inline Rev pow_int(const Rev& a, int n) {
  if (n == 0) return Rev(1.0);
  const double p = std::pow(a.v, n);
  return detail::record1(Op::PowInt, p, a, n * std::pow(a.v, n - 1));
}
// |a| with the kink rule: differentiating at the kink is an error.
inline Rev abs(const Rev& a) {
  if (a.v == 0.0) throw EvalError("|x| differentiated at its kink (x = 0)", a.id);
  return detail::record1(Op::Abs, std::abs(a.v), a, a.v > 0.0 ? 1.0 : -1.0);
}

// Gradient of a scalar-valued builder with respect to a flat parameter vector.
// The builder receives one Rev per slot; slots it never touches get gradient 0.
template <class F>
std::vector<double> gradient(F&& f, std::span<const double> theta) {
  Tape tape;
  std::vector<Rev> leaves;
  leaves.reserve(theta.size());
  for (double t : theta) leaves.push_back(tape.leaf(t));
  Rev y = f(std::span<const Rev>(leaves));
  if (tape.first_nan_node() >= 0) {
    throw EvalError("NaN produced during forward evaluation",
                    tape.first_nan_node());
  }
  if (std::isnan(y.v)) throw EvalError("NaN loss value");
  tape.seed(y, 1.0);
  tape.propagate(0);
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) g[i] = tape.adjoint_of(leaves[i]);
  return g;
}

}  // namespace hcpinn::ad
