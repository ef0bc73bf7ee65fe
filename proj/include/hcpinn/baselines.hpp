#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hcpinn/errors.hpp"
#include "hcpinn/mlp.hpp"
#include "hcpinn/params.hpp"
#include "hcpinn/problems1d.hpp"
#include "hcpinn/problems2d.hpp"

// Soft-constrained baseline models. Neither enforces anything by
// construction; boundary and interface data enter through the soft loss
// terms only.
//
//  - PhiPinn*: one network with an extra input channel carrying a fixed
//    subdomain indicator, so the net can represent kinks by switching on it.
//  - MultiNet*: an independent network per subdomain.
//
// Both expose eval_on(m, ...) so interface residuals can probe either
// one-sided limit; eval(...) resolves the subdomain from the point.

namespace hcpinn {

// Indicator channel value for subdomain m of M, spread evenly over [-1, 1].
inline double subdomain_indicator(std::size_t m, std::size_t subdomains) {
  if (subdomains <= 1) return 0.0;
  return -1.0 + 2.0 * static_cast<double>(m) /
                    static_cast<double>(subdomains - 1);
}

class PhiPinn1D {
 public:
  PhiPinn1D(Problem1D problem, Mlp net)
      : problem_(std::move(problem)), net_(std::move(net)) {
    if (net_.input_dim() != 2)
      throw ConfigError("phi-PINN networks take (x, indicator) inputs");
  }

  std::size_t param_count() const { return net_.param_count(); }
  std::vector<double> initial_params() const {
    return {net_.params().begin(), net_.params().end()};
  }
  std::vector<ParamStore::Block> param_blocks() const {
    return {{"net", 0, net_.param_count()}};
  }
  std::size_t subdomains() const { return problem_.breaks.size() - 1; }

  template <class S>
  ad::Jet2<S> eval(std::span<const S> theta, double x) const {
    return eval_on(problem_.subdomain_of(x), theta, x);
  }

  // The indicator is a constant in x, so its jet carries no derivatives.
  template <class S>
  ad::Jet2<S> eval_on(std::size_t m, std::span<const S> theta,
                      double x) const {
    if (m >= subdomains())
      throw ConfigError("subdomain index out of range");
    const ad::Jet2<S> in[2] = {
        {S(x), S(1.0), S(0.0)},
        {S(subdomain_indicator(m, subdomains())), S(0.0), S(0.0)}};
    return net_.forward(theta, in, 2);
  }

  double value(std::span<const double> theta, double x) const {
    return eval<double>(theta, x).v;
  }

  const Problem1D& problem() const { return problem_; }

 private:
  Problem1D problem_;
  Mlp net_;
};

class MultiNet1D {
 public:
  MultiNet1D(Problem1D problem, std::vector<Mlp> nets)
      : problem_(std::move(problem)), nets_(std::move(nets)) {
    if (nets_.size() != problem_.breaks.size() - 1)
      throw ConfigError("need one network per subdomain");
    offsets_.reserve(nets_.size());
    std::size_t pos = 0;
    for (const auto& net : nets_) {
      if (net.input_dim() != 1)
        throw ConfigError("subdomain networks take a single input");
      offsets_.push_back(pos);
      pos += net.param_count();
    }
    total_ = pos;
  }

  std::size_t param_count() const { return total_; }
  std::vector<double> initial_params() const {
    std::vector<double> theta;
    theta.reserve(total_);
    for (const auto& net : nets_)
      theta.insert(theta.end(), net.params().begin(), net.params().end());
    return theta;
  }
  std::vector<ParamStore::Block> param_blocks() const {
    std::vector<ParamStore::Block> blocks;
    for (std::size_t m = 0; m < nets_.size(); ++m)
      blocks.push_back(
          {"net_" + std::to_string(m), offsets_[m], nets_[m].param_count()});
    return blocks;
  }

  template <class S>
  ad::Jet2<S> eval(std::span<const S> theta, double x) const {
    return eval_on(problem_.subdomain_of(x), theta, x);
  }

  template <class S>
  ad::Jet2<S> eval_on(std::size_t m, std::span<const S> theta,
                      double x) const {
    if (m >= nets_.size()) throw ConfigError("subdomain index out of range");
    const ad::Jet2<S> in{S(x), S(1.0), S(0.0)};
    return nets_[m].forward(
        theta.subspan(offsets_[m], nets_[m].param_count()), &in, 1);
  }

  double value(std::span<const double> theta, double x) const {
    return eval<double>(theta, x).v;
  }

  const Problem1D& problem() const { return problem_; }

 private:
  Problem1D problem_;
  std::vector<Mlp> nets_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

class PhiPinn2D {
 public:
  PhiPinn2D(Problem2D problem, Mlp net)
      : problem_(std::move(problem)), net_(std::move(net)) {
    if (net_.input_dim() != 3)
      throw ConfigError("phi-PINN networks take (x, y, indicator) inputs");
  }

  std::size_t param_count() const { return net_.param_count(); }
  std::vector<double> initial_params() const {
    return {net_.params().begin(), net_.params().end()};
  }
  std::vector<ParamStore::Block> param_blocks() const {
    return {{"net", 0, net_.param_count()}};
  }

  template <class S>
  ad::Jet2<S> eval(std::span<const S> theta, double x, double y,
                   int axis) const {
    return eval_dir(theta, x, y, axis_dir(axis));
  }

  template <class S>
  ad::Jet2<S> eval_dir(std::span<const S> theta, double x, double y,
                       Point2 dir) const {
    return eval_on(problem_.subdomain_of(x, y), theta, x, y, dir);
  }

  template <class S>
  ad::Jet2<S> eval_on(std::size_t m, std::span<const S> theta, double x,
                      double y, Point2 dir) const {
    if (m > 1) throw ConfigError("subdomain index must be 0 or 1");
    const ad::Jet2<S> in[3] = {
        {S(x), S(dir.x), S(0.0)},
        {S(y), S(dir.y), S(0.0)},
        {S(subdomain_indicator(m, 2)), S(0.0), S(0.0)}};
    return net_.forward(theta, in, 3);
  }

  double value(std::span<const double> theta, double x, double y) const {
    return eval<double>(theta, x, y, 0).v;
  }

  const Problem2D& problem() const { return problem_; }

  static Point2 axis_dir(int axis) {
    if (axis != 0 && axis != 1) throw ConfigError("axis must be 0 or 1");
    return axis == 0 ? Point2{1.0, 0.0} : Point2{0.0, 1.0};
  }

 private:
  Problem2D problem_;
  Mlp net_;
};

class MultiNet2D {
 public:
  MultiNet2D(Problem2D problem, std::vector<Mlp> nets)
      : problem_(std::move(problem)), nets_(std::move(nets)) {
    if (nets_.size() != 2) throw ConfigError("need one network per subdomain");
    std::size_t pos = 0;
    for (const auto& net : nets_) {
      if (net.input_dim() != 2)
        throw ConfigError("subdomain networks take (x, y) inputs");
      offsets_.push_back(pos);
      pos += net.param_count();
    }
    total_ = pos;
  }

  std::size_t param_count() const { return total_; }
  std::vector<double> initial_params() const {
    std::vector<double> theta;
    theta.reserve(total_);
    for (const auto& net : nets_)
      theta.insert(theta.end(), net.params().begin(), net.params().end());
    return theta;
  }
  std::vector<ParamStore::Block> param_blocks() const {
    std::vector<ParamStore::Block> blocks;
    for (std::size_t m = 0; m < nets_.size(); ++m)
      blocks.push_back(
          {"net_" + std::to_string(m), offsets_[m], nets_[m].param_count()});
    return blocks;
  }

  template <class S>
  ad::Jet2<S> eval(std::span<const S> theta, double x, double y,
                   int axis) const {
    return eval_dir(theta, x, y, PhiPinn2D::axis_dir(axis));
  }

  template <class S>
  ad::Jet2<S> eval_dir(std::span<const S> theta, double x, double y,
                       Point2 dir) const {
    return eval_on(problem_.subdomain_of(x, y), theta, x, y, dir);
  }

  template <class S>
  ad::Jet2<S> eval_on(std::size_t m, std::span<const S> theta, double x,
                      double y, Point2 dir) const {
    if (m >= nets_.size()) throw ConfigError("subdomain index must be 0 or 1");
    const ad::Jet2<S> in[2] = {{S(x), S(dir.x), S(0.0)},
                               {S(y), S(dir.y), S(0.0)}};
    return nets_[m].forward(
        theta.subspan(offsets_[m], nets_[m].param_count()), in, 2);
  }

  double value(std::span<const double> theta, double x, double y) const {
    return eval<double>(theta, x, y, 0).v;
  }

  const Problem2D& problem() const { return problem_; }

 private:
  Problem2D problem_;
  std::vector<Mlp> nets_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

}  // namespace hcpinn
