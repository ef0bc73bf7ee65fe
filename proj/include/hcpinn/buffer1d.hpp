#pragma once

// Additive buffer ansatz in one dimension.
//
// Each subdomain carries an unrestricted MLP plus a small polynomial
// "buffer" g_m. Before every evaluation pass the buffer coefficients are
// solved from the current network mismatch so that
//   - the end subdomains meet their boundary condition exactly,
//   - at each interface the two buffers split the value mismatch equally
//     with opposite sign, and the flux mismatch likewise,
// which makes the summed ansatz continuous with balanced flux at the
// constraint points. The constraint matrices depend only on geometry, so
// they are LU-factorized once; only right-hand sides are rebuilt from the
// networks, and gradients flow through the linear solve.

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <span>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"
#include "linalg.hpp"
#include "mlp.hpp"
#include "params.hpp"
#include "problems1d.hpp"
#include "window.hpp"

namespace hcpinn {

class BufferAnsatz1D {
 public:
  template <class S>
  struct State {
    std::vector<S> dofs;        // per-subdomain blocks, monomial coefficients
    std::uint64_t version = 0;  // parameter version the solve was based on
  };

  BufferAnsatz1D(Problem1D problem, std::vector<Mlp> nets)
      : problem_(std::move(problem)), nets_(std::move(nets)) {
    const std::size_t M = problem_.subdomains();
    if (nets_.size() != M) throw ConfigError("need one net per subdomain");
    for (const auto& net : nets_)
      if (net.input_dim() != 1)
        throw ConfigError("1D ansatz requires nets with one input");
    if (!problem_.value_jump.empty() || !problem_.flux_jump.empty()) {
      for (double j : problem_.value_jump)
        if (j != 0.0)
          throw ConfigError("buffer ansatz does not support prescribed jumps");
      for (double j : problem_.flux_jump)
        if (j != 0.0)
          throw ConfigError("buffer ansatz does not support prescribed jumps");
    }

    net_offsets_.resize(M);
    std::size_t pos = 0;
    for (std::size_t m = 0; m < M; ++m) {
      net_offsets_[m] = pos;
      pos += nets_[m].param_count();
    }
    total_ = pos;

    dof_offsets_.resize(M + 1);
    for (std::size_t m = 0; m < M; ++m) {
      dof_offsets_[m] = dof_count_;
      dof_count_ += degree(m) + 1;
    }
    dof_offsets_[M] = dof_count_;

    // One constraint system per subdomain, rows in a fixed order:
    // [left row, right row] for quadratics, [left value, left flux,
    // right value, right flux] for interior cubics, [left BC, right BC]
    // for a single subdomain.
    const auto& b = problem_.breaks;
    for (std::size_t m = 0; m < M; ++m) {
      const std::size_t n = degree(m) + 1;
      la::Matrix A(n, n);
      std::size_t row = 0;
      if (m == 0) {
        fill_bc_row(A, row++, problem_.left, b.front());
      } else {
        fill_value_row(A, row++, m, b[m]);
        fill_flux_row(A, row++, m, b[m]);
      }
      if (m + 1 == M) {
        fill_bc_row(A, row++, problem_.right, b.back());
      } else {
        fill_value_row(A, row++, m, b[m + 1]);
        fill_flux_row(A, row++, m, b[m + 1]);
      }
      if (row != n) throw ContractError("buffer system row count mismatch");
      try {
        mats_.push_back(A);
        lus_.emplace_back(A);
      } catch (const SolverError&) {
        throw GeometryError("buffer constraint system is singular (check "
                            "node placement and boundary conditions)");
      }
    }
  }

  // Buffer polynomial degree per subdomain: linear for a single subdomain,
  // quadratic at the ends, cubic inside.
  int degree(std::size_t m) const {
    const std::size_t M = problem_.subdomains();
    if (M == 1) return 1;
    return (m == 0 || m + 1 == M) ? 2 : 3;
  }

  std::size_t param_count() const { return total_; }
  std::size_t dof_count() const { return dof_count_; }
  std::size_t net_param_offset(std::size_t m) const { return net_offsets_[m]; }

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

  // Solve all buffer systems for the given parameters. `version` is an
  // arbitrary caller-side stamp used to detect stale states at eval time.
  template <class S>
  State<S> solve(std::span<const S> theta, std::uint64_t version = 0) const {
    const std::size_t M = problem_.subdomains();
    const auto& b = problem_.breaks;
    // Each net's value and slope at its two subdomain ends.
    std::vector<ad::Jet2<S>> lo(M), hi(M);
    for (std::size_t m = 0; m < M; ++m) {
      lo[m] = net_at(theta, m, b[m]);
      hi[m] = net_at(theta, m, b[m + 1]);
    }
    State<S> state;
    state.version = version;
    state.dofs.resize(dof_count_, S(0.0));
    for (std::size_t m = 0; m < M; ++m) {
      std::vector<S> rhs;
      rhs.reserve(static_cast<std::size_t>(degree(m)) + 1);
      if (m == 0) {
        rhs.push_back(bc_rhs(problem_.left, lo[0]));
      } else {
        rhs.push_back((lo[m] - hi[m - 1]).v * S(-0.5));
        rhs.push_back((lo[m].d1 * problem_.kappa[m] -
                       hi[m - 1].d1 * problem_.kappa[m - 1]) *
                      S(-0.5));
      }
      if (m + 1 == M) {
        rhs.push_back(bc_rhs(problem_.right, hi[m]));
      } else {
        rhs.push_back((hi[m] - lo[m + 1]).v * S(-0.5));
        rhs.push_back((hi[m].d1 * problem_.kappa[m] -
                       lo[m + 1].d1 * problem_.kappa[m + 1]) *
                      S(-0.5));
      }
      auto c = lus_[m].solve(rhs);
      check_residual(m, c, rhs);
      std::copy(c.begin(), c.end(),
                state.dofs.begin() +
                    static_cast<std::ptrdiff_t>(dof_offsets_[m]));
    }
    return state;
  }

  // Full ansatz NN_m + g_m. `current_version`, when nonzero, must match the
  // stamp the state was solved with; a mismatch means the caller updated
  // parameters without re-solving.
  template <class S>
  ad::Jet2<S> eval(std::span<const S> theta, const State<S>& state,
                   const ad::Jet2<S>& x, Side side = Side::Auto,
                   std::uint64_t current_version = 0) const {
    const std::size_t sd = locate(x, side);
    check_version(state, current_version);
    const auto net = net_at(theta, sd, x);
    return net + buffer_at(state, sd, x);
  }

  // Buffer contribution alone (diagnostics, structure tests).
  template <class S>
  ad::Jet2<S> eval_buffer(const State<S>& state, const ad::Jet2<S>& x,
                          Side side = Side::Auto,
                          std::uint64_t current_version = 0) const {
    const std::size_t sd = locate(x, side);
    check_version(state, current_version);
    return buffer_at(state, sd, x);
  }

  double value(std::span<const double> theta, const State<double>& state,
               double x, Side side = Side::Auto) const {
    return eval<double>(theta, state, ad::jet_var(x), side).v;
  }

  const Problem1D& problem() const { return problem_; }
  const std::vector<Mlp>& nets() const { return nets_; }

 private:
  static void fill_poly_row(la::Matrix& A, std::size_t row, double x,
                            int order, double scale) {
    // d^order/dx^order of x^k, times scale.
    for (std::size_t k = 0; k < A.cols(); ++k) {
      double v = 1.0;
      int kk = static_cast<int>(k);
      for (int d = 0; d < order; ++d) v *= kk - d;
      if (kk - order >= 0)
        v *= std::pow(x, kk - order);
      else
        v = 0.0;
      A(row, k) = scale * v;
    }
  }
  void fill_bc_row(la::Matrix& A, std::size_t row,
                   const BoundaryCondition1D& bc, double x) const {
    fill_poly_row(A, row, x, bc.type == BcType::Dirichlet ? 0 : 1, 1.0);
  }
  void fill_value_row(la::Matrix& A, std::size_t row, std::size_t,
                      double x) const {
    fill_poly_row(A, row, x, 0, 1.0);
  }
  void fill_flux_row(la::Matrix& A, std::size_t row, std::size_t m,
                     double x) const {
    fill_poly_row(A, row, x, 1, problem_.kappa[m]);
  }

  template <class S>
  static S bc_rhs(const BoundaryCondition1D& bc, const ad::Jet2<S>& net) {
    return bc.type == BcType::Dirichlet ? bc.value - net.v
                                        : bc.value - net.d1;
  }

  template <class S>
  ad::Jet2<S> net_at(std::span<const S> theta, std::size_t m,
                     const ad::Jet2<S>& x) const {
    return nets_[m].forward(theta.subspan(net_offsets_[m],
                                          nets_[m].param_count()),
                            &x, 1);
  }
  template <class S>
  ad::Jet2<S> net_at(std::span<const S> theta, std::size_t m, double x) const {
    const auto xj = ad::jet_var(S(x));
    return net_at(theta, m, xj);
  }

  template <class S>
  ad::Jet2<S> buffer_at(const State<S>& state, std::size_t m,
                        const ad::Jet2<S>& x) const {
    ad::Jet2<S> acc{S(0.0), S(0.0), S(0.0)};
    for (std::size_t k = dof_offsets_[m + 1]; k-- > dof_offsets_[m];)
      acc = acc * x + state.dofs[k];
    return acc;
  }

  template <class S>
  std::size_t locate(const ad::Jet2<S>& x, Side side) const {
    const double xv = ad::value_of(x.v);
    const auto& b = problem_.breaks;
    if (xv < b.front() - 1e-12 || xv > b.back() + 1e-12)
      throw GeometryError("evaluation point outside the domain");
    return problem_.subdomain_of(std::min(std::max(xv, b.front()), b.back()),
                                 side == Side::Below ? -1 : 0);
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
    for (const auto& r : rhs) scale = std::max(scale, std::abs(ad::value_of(r)));
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k)
        acc += mats_[m](i, k) * ad::value_of(c[k]);
      if (std::abs(acc - ad::value_of(rhs[i])) > 1e-12 * scale)
        throw SolverError("buffer system residual exceeds tolerance");
    }
  }

  Problem1D problem_;
  std::vector<Mlp> nets_;
  std::vector<std::size_t> net_offsets_, dof_offsets_;
  std::size_t total_ = 0, dof_count_ = 0;
  std::vector<la::Matrix> mats_;
  std::vector<la::Lu> lus_;
};

}  // namespace hcpinn
