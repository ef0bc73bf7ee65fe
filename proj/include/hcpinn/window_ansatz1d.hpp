#pragma once

// Hard-constrained windowing ansatz in one dimension.
//
// The solution is assembled from compact-support pieces:
//   - one windowed MLP per subdomain (zero value and slope at the ends),
//   - per breakpoint, a value window and a slope window carrying either
//     prescribed boundary data or trainable scalars.
// Interface value continuity holds because both sides share one value
// scalar; flux balance holds because the slope term stores the flux and
// divides by the local conductivity. Prescribed jumps shift the upper
// side's scalars. All of this is by construction, independent of theta.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"
#include "mlp.hpp"
#include "params.hpp"
#include "problems1d.hpp"
#include "window.hpp"

namespace hcpinn {

enum class NodeRole { DirichletBoundary, NeumannBoundary, Interface };

struct InteriorElement1D {
  double center = 0.0;
  double half_width = 0.0;
  int k = 1;
};

struct NodeElement1D {
  double position = 0.0;
  NodeRole role = NodeRole::Interface;
  int k_d = 1;
  int k_n = 1;
  double beta = 2.0;
  // Resolved support half-widths per side; zero where the domain ends.
  double below_half_width = 0.0;
  double above_half_width = 0.0;
};

struct WindowLayout1D {
  std::vector<InteriorElement1D> interior;  // one per subdomain, in order
  std::vector<NodeElement1D> nodes;         // breakpoints, ascending
};

// Standard layout for a problem: interior windows spanning each subdomain
// exactly, node windows reaching a fraction beta of the neighboring
// subdomain half-width into each side. beta = 2 makes a node window touch
// the adjacent nodes ("perfect overlap").
inline WindowLayout1D make_window_layout(const Problem1D& p, double beta = 2.0,
                                         int k_int = 1, int k_d = 1,
                                         int k_n = 1) {
  if (!(beta > 0.0) || beta > 2.0)
    throw ConfigError("window size factor must lie in (0, 2], got " +
                      std::to_string(beta));
  WindowLayout1D layout;
  const auto& b = p.breaks;
  for (std::size_t m = 0; m + 1 < b.size(); ++m) {
    layout.interior.push_back(
        {0.5 * (b[m] + b[m + 1]), 0.5 * (b[m + 1] - b[m]), k_int});
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    NodeElement1D node;
    node.position = b[i];
    if (i == 0) {
      node.role = p.left.type == BcType::Dirichlet ? NodeRole::DirichletBoundary
                                                   : NodeRole::NeumannBoundary;
    } else if (i + 1 == b.size()) {
      node.role = p.right.type == BcType::Dirichlet
                      ? NodeRole::DirichletBoundary
                      : NodeRole::NeumannBoundary;
    } else {
      node.role = NodeRole::Interface;
    }
    node.k_d = k_d;
    node.k_n = k_n;
    node.beta = beta;
    if (i > 0) node.below_half_width = beta * 0.5 * (b[i] - b[i - 1]);
    if (i + 1 < b.size()) node.above_half_width = beta * 0.5 * (b[i + 1] - b[i]);
    layout.nodes.push_back(node);
  }
  return layout;
}

class WindowAnsatz1D {
 public:
  WindowAnsatz1D(Problem1D problem, WindowLayout1D layout, std::vector<Mlp> nets)
      : problem_(std::move(problem)),
        layout_(std::move(layout)),
        nets_(std::move(nets)) {
    validate();
    const std::size_t n_itf = problem_.subdomains() - 1;
    if (!problem_.value_jump.empty() && problem_.value_jump.size() != n_itf)
      throw ConfigError("value jump list does not match the interface count");
    if (!problem_.flux_jump.empty() && problem_.flux_jump.size() != n_itf)
      throw ConfigError("flux jump list does not match the interface count");
    jump_d_ = problem_.value_jump;
    jump_d_.resize(n_itf, 0.0);
    jump_n_ = problem_.flux_jump;
    jump_n_.resize(n_itf, 0.0);
    for (const auto& el : layout_.interior)
      interior_shapes_.push_back(window_shape(WindowKind::Interior, el.k));
    for (const auto& node : layout_.nodes) {
      value_shapes_.push_back(window_shape(WindowKind::Value, node.k_d));
      slope_shapes_.push_back(window_shape(WindowKind::Slope, node.k_n));
    }
    net_offsets_.resize(nets_.size());
    std::size_t pos = 0;
    for (std::size_t m = 0; m < nets_.size(); ++m) {
      net_offsets_[m] = pos;
      pos += nets_[m].param_count();
    }
    scalar_offset_ = pos;
    node_offsets_.resize(layout_.nodes.size());
    for (std::size_t i = 0; i < layout_.nodes.size(); ++i) {
      node_offsets_[i] = pos;
      pos += layout_.nodes[i].role == NodeRole::Interface ? 2 : 1;
    }
    total_ = pos;
  }

  std::size_t param_count() const { return total_; }
  std::size_t net_param_offset(std::size_t m) const { return net_offsets_[m]; }
  // Scalar slots per node, in node order:
  //   Dirichlet boundary -> [slope], Neumann boundary -> [value],
  //   interface -> [value, flux].
  std::size_t node_param_offset(std::size_t i, int which = 0) const {
    return node_offsets_[i] + static_cast<std::size_t>(which);
  }

  // Initial parameter vector: the nets' current weights, node scalars zero.
  std::vector<double> initial_params() const {
    std::vector<double> theta(total_, 0.0);
    for (std::size_t m = 0; m < nets_.size(); ++m) {
      auto p = nets_[m].params();
      std::copy(p.begin(), p.end(), theta.begin() + static_cast<std::ptrdiff_t>(net_offsets_[m]));
    }
    return theta;
  }

  std::vector<ParamStore::Block> param_blocks() const {
    std::vector<ParamStore::Block> blocks;
    for (std::size_t m = 0; m < nets_.size(); ++m)
      blocks.push_back({"net_" + std::to_string(m), net_offsets_[m],
                        nets_[m].param_count()});
    blocks.push_back({"node_scalars", scalar_offset_, total_ - scalar_offset_});
    return blocks;
  }

  template <class S>
  ad::Jet2<S> eval(std::span<const S> theta, const ad::Jet2<S>& x,
                   Side side = Side::Auto) const {
    return eval_impl(theta, x, side, true, true);
  }
  // Partial sums, mostly for diagnostics: the windowed-net contribution and
  // the boundary/interface contribution. eval = interior + node terms.
  template <class S>
  ad::Jet2<S> eval_interior_terms(std::span<const S> theta,
                                  const ad::Jet2<S>& x,
                                  Side side = Side::Auto) const {
    return eval_impl(theta, x, side, true, false);
  }
  template <class S>
  ad::Jet2<S> eval_node_terms(std::span<const S> theta, const ad::Jet2<S>& x,
                              Side side = Side::Auto) const {
    return eval_impl(theta, x, side, false, true);
  }

  double value(std::span<const double> theta, double x,
               Side side = Side::Auto) const {
    return eval<double>(theta, ad::jet_var(x), side).v;
  }

  const Problem1D& problem() const { return problem_; }
  const WindowLayout1D& layout() const { return layout_; }
  const std::vector<Mlp>& nets() const { return nets_; }

 private:
  void validate() const {
    const auto& b = problem_.breaks;
    if (layout_.interior.size() != problem_.subdomains())
      throw ConfigError("layout has " + std::to_string(layout_.interior.size()) +
                        " interior elements for " +
                        std::to_string(problem_.subdomains()) + " subdomains");
    if (nets_.size() != layout_.interior.size())
      throw ConfigError("need one net per subdomain");
    for (const auto& net : nets_)
      if (net.input_dim() != 1)
        throw ConfigError("1D ansatz requires nets with one input");
    if (layout_.nodes.size() != b.size())
      throw ConfigError("layout must carry one node element per breakpoint");
    const double tol = 1e-12;
    for (std::size_t m = 0; m < layout_.interior.size(); ++m) {
      const auto& el = layout_.interior[m];
      if (std::abs(el.center - el.half_width - b[m]) > tol ||
          std::abs(el.center + el.half_width - b[m + 1]) > tol)
        throw ConfigError("interior element " + std::to_string(m) +
                          " does not span its subdomain");
    }
    for (std::size_t i = 0; i < layout_.nodes.size(); ++i) {
      const auto& node = layout_.nodes[i];
      if (std::abs(node.position - b[i]) > tol)
        throw ConfigError("node element " + std::to_string(i) +
                          " is not on a breakpoint");
      if (!(node.beta > 0.0) || node.beta > 2.0)
        throw ConfigError("window size factor must lie in (0, 2]");
      const bool first = i == 0, last = i + 1 == layout_.nodes.size();
      const NodeRole want =
          first ? (problem_.left.type == BcType::Dirichlet
                       ? NodeRole::DirichletBoundary
                       : NodeRole::NeumannBoundary)
          : last ? (problem_.right.type == BcType::Dirichlet
                        ? NodeRole::DirichletBoundary
                        : NodeRole::NeumannBoundary)
                 : NodeRole::Interface;
      if (node.role != want)
        throw ConfigError("node element " + std::to_string(i) +
                          " role does not match the problem data");
      if (first ? node.below_half_width != 0.0
                : (node.below_half_width <= 0.0 ||
                   node.below_half_width > b[i] - b[i - 1] + tol))
        throw ConfigError("node " + std::to_string(i) +
                          " lower support is out of range");
      if (last ? node.above_half_width != 0.0
               : (node.above_half_width <= 0.0 ||
                  node.above_half_width > b[i + 1] - b[i] + tol))
        throw ConfigError("node " + std::to_string(i) +
                          " upper support is out of range");
    }
  }

  // Resolve which side of `pos` the point lies on: -1 below, +1 above.
  // Points exactly on the node fall back to the evaluation side.
  static int rel_side(double xv, double pos, int eval_side) {
    if (xv < pos) return -1;
    if (xv > pos) return 1;
    return eval_side;
  }

  template <class S>
  ad::Jet2<S> eval_impl(std::span<const S> theta, const ad::Jet2<S>& x,
                        Side side, bool with_interior, bool with_nodes) const {
    const double xv = ad::value_of(x.v);
    const auto& b = problem_.breaks;
    if (xv < b.front() - 1e-12 || xv > b.back() + 1e-12)
      throw GeometryError("evaluation point outside the domain");
    // Half-open convention: a point on a breakpoint belongs to the upper
    // subdomain unless the caller asked for the lower side. Domain edges
    // have only one admissible side, whatever the hint says.
    int eval_side = side == Side::Below ? -1 : 1;
    if (xv <= b.front()) eval_side = 1;
    if (xv >= b.back()) eval_side = -1;
    const std::size_t sd =
        problem_.subdomain_of(std::min(std::max(xv, b.front()), b.back()),
                              eval_side < 0 ? -1 : 0);

    ad::Jet2<S> out{S(0.0), S(0.0), S(0.0)};
    if (with_interior) {
      const auto& el = layout_.interior[sd];
      WindowSpec spec{WindowKind::Interior, el.center, el.half_width};
      const auto w = eval_window(spec, interior_shapes_[sd], x, Side::Auto);
      const auto net = nets_[sd].forward(
          theta.subspan(net_offsets_[sd], nets_[sd].param_count()), &x, 1);
      out = out + w * net;
    }
    if (with_nodes) {
      // Only the two nodes bounding the subdomain can be in range.
      add_node_term(theta, x, sd, eval_side, out);
      add_node_term(theta, x, sd + 1, eval_side, out);
    }
    return out;
  }

  template <class S>
  void add_node_term(std::span<const S> theta, const ad::Jet2<S>& x,
                     std::size_t i, int eval_side, ad::Jet2<S>& out) const {
    const auto& node = layout_.nodes[i];
    const double xv = ad::value_of(x.v);
    const int rel = rel_side(xv, node.position, eval_side);
    const double hw =
        rel < 0 ? node.below_half_width : node.above_half_width;
    if (hw == 0.0 || std::abs(xv - node.position) > hw) return;
    const Side hint = rel < 0 ? Side::Below : Side::Above;
    WindowSpec vspec{WindowKind::Value, node.position, hw};
    WindowSpec sspec{WindowKind::Slope, node.position, hw};
    const auto wd = eval_window(vspec, value_shapes_[i], x, hint);
    const auto wn = eval_window(sspec, slope_shapes_[i], x, hint);
    switch (node.role) {
      case NodeRole::DirichletBoundary: {
        const double u_b = (i == 0 ? problem_.left : problem_.right).value;
        const S& theta_n = theta[node_offsets_[i]];
        out = out + wd * u_b + wn * theta_n;
        break;
      }
      case NodeRole::NeumannBoundary: {
        const double du_b = (i == 0 ? problem_.left : problem_.right).value;
        const S& theta_d = theta[node_offsets_[i]];
        out = out + wd * theta_d + wn * du_b;
        break;
      }
      case NodeRole::Interface: {
        const std::size_t itf = i - 1;  // node i sits after subdomain i-1
        const S& theta_d = theta[node_offsets_[i]];
        const S& theta_n = theta[node_offsets_[i] + 1];
        const double jump_d = rel > 0 ? jump_d_[itf] : 0.0;
        const double jump_n = rel > 0 ? jump_n_[itf] : 0.0;
        const double inv_kappa =
            1.0 / problem_.kappa[rel < 0 ? itf : itf + 1];
        out = out + wd * (theta_d + jump_d) +
              wn * ((theta_n + jump_n) * inv_kappa);
        break;
      }
    }
  }

  Problem1D problem_;
  WindowLayout1D layout_;
  std::vector<Mlp> nets_;
  std::vector<Polynomial> interior_shapes_, value_shapes_, slope_shapes_;
  std::vector<double> jump_d_, jump_n_;
  std::vector<std::size_t> net_offsets_, node_offsets_;
  std::size_t scalar_offset_ = 0, total_ = 0;
};

}  // namespace hcpinn
