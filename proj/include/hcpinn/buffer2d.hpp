#pragma once

// Additive buffer ansatz in two dimensions.
//
// Each of the two subdomains carries an unrestricted MLP plus a buffer g_m
// assembled from Gaussians centered at boundary and interface sample
// points: a plain Gaussian per Dirichlet sample, a normal-linear Gaussian
// per Neumann sample, and both (two DOFs) per interface sample. Before
// every evaluation pass the DOFs are solved from the current network
// mismatch so that at each sample point
//   - Dirichlet samples meet g = u_b - NN,
//   - Neumann samples meet n.grad g = n.grad u - n.grad NN,
//   - interface samples split the value mismatch equally with opposite
//     sign between the two buffers, the flux mismatch likewise,
// which makes the summed ansatz satisfy its conditions exactly at the
// samples and smoothly in between. The constraint matrices depend only on
// geometry, so they are LU-factorized once; right-hand sides are rebuilt
// from the networks each solve and gradients flow through the linear
// system.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"
#include "linalg.hpp"
#include "mlp.hpp"
#include "params.hpp"
#include "problems2d.hpp"
#include "quadrature.hpp"

namespace hcpinn {

enum class SampleKind { Dirichlet, Neumann, Interface };

struct BufferSample2D {
  Point2 pos;
  Point2 normal;  // outward; unused for Dirichlet samples
  SampleKind kind = SampleKind::Dirichlet;
};

// The n Gauss-Legendre nodes mapped affinely onto the segment a-b.
inline std::vector<Point2> gauss_legendre_samples(Point2 a, Point2 b, int n) {
  if (n < 1 || n > 16)
    throw ConfigError("boundary sample count must be in [1, 16]");
  if (std::hypot(b.x - a.x, b.y - a.y) < 1e-12)
    throw GeometryError("degenerate sampling segment");
  const auto rule = gauss_legendre(n);
  std::vector<Point2> pts(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t = 0.5 * (1.0 + rule.nodes[i]);
    pts[i] = {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
  }
  return pts;
}

class BufferAnsatz2D {
 public:
  template <class S>
  struct State {
    std::vector<S> dofs;        // per-subdomain blocks, one per basis column
    std::uint64_t version = 0;  // parameter version the solve was based on
  };

  BufferAnsatz2D(Problem2D problem, std::vector<Mlp> nets,
                 std::array<std::vector<BufferSample2D>, 2> samples,
                 double r0 = 1.0 / 9.0)
      : problem_(std::move(problem)),
        nets_(std::move(nets)),
        samples_(std::move(samples)),
        r0_(r0) {
    if (nets_.size() != 2) throw ConfigError("need one net per subdomain");
    for (const auto& net : nets_)
      if (net.input_dim() != 2)
        throw ConfigError("2D ansatz requires nets with two inputs");
    if (!(r0_ > 0.0)) throw ConfigError("buffer radius r0 must be positive");

    net_offsets_.resize(2);
    std::size_t pos = 0;
    for (std::size_t m = 0; m < 2; ++m) {
      net_offsets_[m] = pos;
      pos += nets_[m].param_count();
    }
    total_ = pos;

    for (std::size_t m = 0; m < 2; ++m) {
      if (samples_[m].empty())
        throw ConfigError("each subdomain needs at least one buffer sample");
      dof_offsets_[m] = dof_count_;
      for (const auto& s : samples_[m]) {
        if (s.kind != SampleKind::Dirichlet &&
            std::abs(std::hypot(s.normal.x, s.normal.y) - 1.0) > 1e-9)
          throw ConfigError("buffer sample normal must be unit length");
        // One plain Gaussian per Dirichlet sample, one normal-linear
        // Gaussian per Neumann sample, both per interface sample.
        if (s.kind != SampleKind::Neumann)
          columns_[m].push_back({s.pos, s.normal, false});
        if (s.kind != SampleKind::Dirichlet)
          columns_[m].push_back({s.pos, s.normal, true});
        dof_count_ += s.kind == SampleKind::Interface ? 2 : 1;
      }
    }
    dof_offsets_[2] = dof_count_;

    for (std::size_t m = 0; m < 2; ++m) {
      const std::size_t n = dofs(m);
      la::Matrix A(n, n);
      std::size_t row = 0;
      for (const auto& s : samples_[m]) {
        if (s.kind == SampleKind::Dirichlet) {
          for (std::size_t c = 0; c < n; ++c)
            A(row, c) = basis_value(columns_[m][c], s.pos.x, s.pos.y);
          ++row;
        } else if (s.kind == SampleKind::Neumann) {
          for (std::size_t c = 0; c < n; ++c) {
            const auto g = basis_grad(columns_[m][c], s.pos.x, s.pos.y);
            A(row, c) = s.normal.x * g.x + s.normal.y * g.y;
          }
          ++row;
        } else {
          for (std::size_t c = 0; c < n; ++c)
            A(row, c) = basis_value(columns_[m][c], s.pos.x, s.pos.y);
          ++row;
          for (std::size_t c = 0; c < n; ++c) {
            const auto g = basis_grad(columns_[m][c], s.pos.x, s.pos.y);
            A(row, c) =
                problem_.kappa[m] * (s.normal.x * g.x + s.normal.y * g.y);
          }
          ++row;
        }
      }
      if (row != n) throw ContractError("buffer system row count mismatch");
      const double cond = la::cond1(A);
      if (!(cond < 1e12))
        throw SolverError(
            "buffer constraint matrix ill-conditioned (cond ~ " +
            std::to_string(cond) + "); use a larger r0 or fewer samples");
      try {
        mats_[m] = A;
        lus_.emplace_back(A);
      } catch (const SolverError&) {
        throw GeometryError(
            "buffer constraint system is singular (coincident samples?)");
      }
    }
  }

  // Canonical sampling: Gauss-Legendre points on every boundary segment and
  // on the interface, assigned to the owning subdomain.
  BufferAnsatz2D(const Problem2D& problem, std::vector<Mlp> nets,
                 int edge_samples = 8, int interface_samples = 8,
                 double r0 = 1.0 / 9.0)
      : BufferAnsatz2D(problem, std::move(nets),
                       default_samples(problem, edge_samples,
                                       interface_samples),
                       r0) {}

  static std::array<std::vector<BufferSample2D>, 2> default_samples(
      const Problem2D& p, int edge_samples, int interface_samples) {
    std::array<std::vector<BufferSample2D>, 2> smp;
    for (const auto& seg : p.boundary)
      for (const auto& q : gauss_legendre_samples(seg.a, seg.b, edge_samples))
        smp[p.subdomain_of(q.x, q.y)].push_back(
            {q, seg.normal,
             seg.type == BcType::Dirichlet ? SampleKind::Dirichlet
                                           : SampleKind::Neumann});
    const auto nl = p.itf_normal_left();
    for (const auto& q :
         gauss_legendre_samples({p.x_bottom, p.ymin}, {p.x_top, p.ymax},
                                interface_samples)) {
      smp[0].push_back({q, {-nl.x, -nl.y}, SampleKind::Interface});
      smp[1].push_back({q, {nl.x, nl.y}, SampleKind::Interface});
    }
    return smp;
  }

  std::size_t dofs(std::size_t m) const {
    return dof_offsets_[m + 1] - dof_offsets_[m];
  }
  std::size_t dof_count() const { return dof_count_; }
  std::size_t param_count() const { return total_; }
  std::size_t net_param_offset(std::size_t m) const { return net_offsets_[m]; }
  const std::vector<BufferSample2D>& samples(std::size_t m) const {
    return samples_[m];
  }
  double r0() const { return r0_; }
  double condition(std::size_t m) const { return la::cond1(mats_[m]); }

  std::vector<double> initial_params() const {
    std::vector<double> theta(total_);
    for (std::size_t m = 0; m < nets_.size(); ++m) {
      auto p = nets_[m].params();
      std::copy(p.begin(), p.end(),
                theta.begin() + static_cast<std::ptrdiff_t>(net_offsets_[m]));
    }
    return theta;
  }

  std::vector<ParamStore::Block> param_blocks() const {
    std::vector<ParamStore::Block> blocks;
    for (std::size_t m = 0; m < nets_.size(); ++m)
      blocks.push_back({"net_" + std::to_string(m), net_offsets_[m],
                        nets_[m].param_count()});
    return blocks;
  }

  // Solve both buffer systems for the given parameters. `version` is an
  // arbitrary caller-side stamp used to detect stale states at eval time.
  template <class S>
  State<S> solve(std::span<const S> theta, std::uint64_t version = 0) const {
    State<S> state;
    state.version = version;
    state.dofs.resize(dof_count_, S(0.0));
    for (std::size_t m = 0; m < 2; ++m) {
      const std::size_t o = m == 0 ? 1 : 0;
      std::vector<S> rhs;
      rhs.reserve(dofs(m));
      for (const auto& s : samples_[m]) {
        if (s.kind == SampleKind::Dirichlet) {
          const auto nn = net_directional(theta, m, s.pos, {0.0, 0.0});
          const double ub =
              problem_.boundary_condition(s.pos.x, s.pos.y).value;
          rhs.push_back(S(ub) - nn.v);
        } else if (s.kind == SampleKind::Neumann) {
          const auto nn = net_directional(theta, m, s.pos, s.normal);
          const double flux =
              problem_.boundary_condition(s.pos.x, s.pos.y).value;
          rhs.push_back(S(flux / problem_.kappa[m]) - nn.d1);
        } else {
          const auto nn = net_directional(theta, m, s.pos, s.normal);
          const auto other = net_directional(theta, o, s.pos, s.normal);
          rhs.push_back((nn.v - other.v) * S(-0.5));
          rhs.push_back(
              (nn.d1 * problem_.kappa[m] - other.d1 * problem_.kappa[o]) *
              S(-0.5));
        }
      }
      auto c = lus_[m].solve(rhs);
      check_residual(m, c, rhs);
      std::copy(c.begin(), c.end(),
                state.dofs.begin() +
                    static_cast<std::ptrdiff_t>(dof_offsets_[m]));
    }
    return state;
  }

  // Full ansatz NN_m + g_m with derivatives along the given axis (0 = x,
  // 1 = y). `current_version`, when nonzero, must match the stamp the state
  // was solved with.
  template <class S>
  ad::Jet2<S> eval(std::span<const S> theta, const State<S>& state, double x,
                   double y, int axis,
                   std::uint64_t current_version = 0) const {
    return eval_on(locate(x, y), theta, state, x, y, axis, current_version);
  }

  // Same, for an explicitly chosen subdomain; lets callers probe either
  // one-sided limit at interface points.
  template <class S>
  ad::Jet2<S> eval_on(std::size_t m, std::span<const S> theta,
                      const State<S>& state, double x, double y, int axis,
                      std::uint64_t current_version = 0) const {
    if (m > 1) throw ConfigError("subdomain index must be 0 or 1");
    check_version(state, current_version);
    const auto [xj, yj] = axis_jets<S>(x, y, axis);
    const ad::Jet2<S> in[2] = {xj, yj};
    const auto net = nets_[m].forward(
        theta.subspan(net_offsets_[m], nets_[m].param_count()), in, 2);
    return net + buffer_at(state, m, xj, yj);
  }

  // Buffer contribution alone (diagnostics, structure tests).
  template <class S>
  ad::Jet2<S> eval_buffer(const State<S>& state, double x, double y, int axis,
                          std::uint64_t current_version = 0) const {
    const std::size_t m = locate(x, y);
    check_version(state, current_version);
    const auto [xj, yj] = axis_jets<S>(x, y, axis);
    return buffer_at(state, m, xj, yj);
  }

  double value(std::span<const double> theta, const State<double>& state,
               double x, double y) const {
    return eval<double>(theta, state, x, y, 0).v;
  }

  const Problem2D& problem() const { return problem_; }
  const std::vector<Mlp>& nets() const { return nets_; }

 private:
  struct BasisFn {
    Point2 center;
    Point2 normal;
    bool linear = false;  // normal-linear Gaussian instead of plain
  };

  double basis_value(const BasisFn& f, double x, double y) const {
    const double dx = x - f.center.x, dy = y - f.center.y;
    const double e = std::exp(-(dx * dx + dy * dy) / (r0_ * r0_));
    return f.linear ? (f.normal.x * dx + f.normal.y * dy) * e : e;
  }
  Point2 basis_grad(const BasisFn& f, double x, double y) const {
    const double dx = x - f.center.x, dy = y - f.center.y;
    const double e = std::exp(-(dx * dx + dy * dy) / (r0_ * r0_));
    const double s = -2.0 / (r0_ * r0_);
    if (!f.linear) return {s * dx * e, s * dy * e};
    const double lin = f.normal.x * dx + f.normal.y * dy;
    return {(f.normal.x + lin * s * dx) * e, (f.normal.y + lin * s * dy) * e};
  }

  template <class S>
  ad::Jet2<S> basis_eval(const BasisFn& f, const ad::Jet2<S>& x,
                         const ad::Jet2<S>& y) const {
    const auto dx = x - S(f.center.x), dy = y - S(f.center.y);
    const auto e = ad::exp((dx * dx + dy * dy) * S(-1.0 / (r0_ * r0_)));
    if (!f.linear) return e;
    return (dx * S(f.normal.x) + dy * S(f.normal.y)) * e;
  }

  template <class S>
  static std::pair<ad::Jet2<S>, ad::Jet2<S>> axis_jets(double x, double y,
                                                       int axis) {
    if (axis != 0 && axis != 1)
      throw ConfigError("derivative axis must be 0 or 1");
    auto xj = ad::jet_const(S(x)), yj = ad::jet_const(S(y));
    (axis == 0 ? xj : yj).d1 = S(1.0);
    return {xj, yj};
  }

  // Value and normal-directional derivative of net m at a point, in one
  // directionally seeded pass.
  template <class S>
  ad::Jet2<S> net_directional(std::span<const S> theta, std::size_t m,
                              Point2 p, Point2 dir) const {
    const ad::Jet2<S> in[2] = {{S(p.x), S(dir.x), S(0.0)},
                               {S(p.y), S(dir.y), S(0.0)}};
    return nets_[m].forward(
        theta.subspan(net_offsets_[m], nets_[m].param_count()), in, 2);
  }

  template <class S>
  ad::Jet2<S> buffer_at(const State<S>& state, std::size_t m,
                        const ad::Jet2<S>& x, const ad::Jet2<S>& y) const {
    ad::Jet2<S> acc{S(0.0), S(0.0), S(0.0)};
    for (std::size_t c = 0; c < columns_[m].size(); ++c)
      acc = acc + basis_eval(columns_[m][c], x, y) *
                      state.dofs[dof_offsets_[m] + c];
    return acc;
  }

  std::size_t locate(double x, double y) const {
    if (!problem_.contains(x, y))
      throw GeometryError("evaluation point outside the domain");
    return problem_.subdomain_of(x, y);
  }

  template <class S>
  void check_version(const State<S>& state,
                     std::uint64_t current_version) const {
    if (current_version != 0 && state.version != current_version)
      throw ContractError(
          "buffer coefficients are stale: parameters changed since solve");
  }

  template <class S>
  void check_residual(std::size_t m, const std::vector<S>& c,
                      const std::vector<S>& rhs) const {
    double scale = 1.0;
    for (const auto& r : rhs)
      scale = std::max(scale, std::abs(ad::value_of(r)));
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k)
        acc += mats_[m](i, k) * ad::value_of(c[k]);
      if (std::abs(acc - ad::value_of(rhs[i])) > 1e-9 * scale)
        throw SolverError("buffer system residual exceeds tolerance");
    }
  }

  Problem2D problem_;
  std::vector<Mlp> nets_;
  std::array<std::vector<BufferSample2D>, 2> samples_;
  double r0_;
  std::vector<std::size_t> net_offsets_;
  std::size_t total_ = 0, dof_count_ = 0;
  std::array<std::size_t, 3> dof_offsets_{0, 0, 0};
  std::array<std::vector<BasisFn>, 2> columns_;
  std::array<la::Matrix, 2> mats_;
  std::vector<la::Lu> lus_;
};

}  // namespace hcpinn
