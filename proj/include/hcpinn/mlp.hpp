#pragma once

// Fully connected scalar-output networks evaluated in jet arithmetic.
//
// Parameters are packed flat per layer as [W row-major (out x in), b], so a
// network can either own its parameters or read them from a slice of a
// global training vector (possibly lifted to reverse-mode scalars).

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"
#include "rng.hpp"

namespace hcpinn {

enum class Activation { Tanh, Sigmoid, Swish };

inline Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "swish" || s == "silu") return Activation::Swish;
  throw ConfigError("unknown activation '" + s + "'");
}

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Swish: return "swish";
  }
  return "?";
}

struct InitScheme {
  enum class Kind { Glorot, GlorotScaled, Normal };
  Kind kind = Kind::GlorotScaled;
  // Scale factor for GlorotScaled, standard deviation for Normal. Zero is
  // allowed (degenerate all-zero weights); negative values are rejected.
  double param = 0.5;

  bool operator==(const InitScheme&) const = default;
};

inline InitScheme parse_init(const std::string& kind, double param) {
  InitScheme s;
  if (kind == "glorot") {
    s.kind = InitScheme::Kind::Glorot;
    s.param = 0.0;
  } else if (kind == "glorot_scaled") {
    s.kind = InitScheme::Kind::GlorotScaled;
    s.param = param;
  } else if (kind == "normal") {
    s.kind = InitScheme::Kind::Normal;
    s.param = param;
  } else {
    throw ConfigError("unknown init scheme '" + kind + "'");
  }
  if (s.param < 0.0) throw ConfigError("init scale/sigma must be non-negative");
  return s;
}

inline std::string to_string(const InitScheme& s) {
  switch (s.kind) {
    case InitScheme::Kind::Glorot: return "glorot";
    case InitScheme::Kind::GlorotScaled: return "glorot_scaled";
    case InitScheme::Kind::Normal: return "normal";
  }
  return "?";
}

class Mlp {
 public:
  static constexpr int kMaxWidth = 64;

  Mlp() = default;
  Mlp(std::vector<int> widths, Activation act)
      : widths_(std::move(widths)), act_(act) {
    if (widths_.size() < 2) throw ConfigError("network needs at least two layers");
    for (int w : widths_)
      if (w < 1 || w > kMaxWidth)
        throw ConfigError("layer width out of range [1, 64]");
    if (widths_.back() != 1)
      throw ConfigError("networks here are scalar-valued; output width must be 1");
    params_.assign(param_count_of(widths_), 0.0);
  }

  // Seeded initialization: weights per scheme, biases zero.
  static Mlp create(std::vector<int> widths, Activation act,
                    const InitScheme& init, std::uint64_t seed) {
    Mlp net(std::move(widths), act);
    net.initialize(init, seed);
    return net;
  }

  void initialize(const InitScheme& init, std::uint64_t seed) {
    if (init.param < 0.0) throw ConfigError("init scale/sigma must be non-negative");
    Rng rng(seed);
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      const int fan_in = widths_[l];
      const int fan_out = widths_[l + 1];
      const double glorot = std::sqrt(6.0 / (fan_in + fan_out));
      for (int i = 0; i < fan_out * fan_in; ++i) {
        double w = 0.0;
        switch (init.kind) {
          case InitScheme::Kind::Glorot:
            w = rng.uniform(-glorot, glorot);
            break;
          case InitScheme::Kind::GlorotScaled:
            w = init.param * rng.uniform(-glorot, glorot);
            break;
          case InitScheme::Kind::Normal:
            w = rng.normal(init.param);
            break;
        }
        params_[pos++] = w;
      }
      pos += static_cast<std::size_t>(fan_out);  // biases stay zero
    }
  }

  const std::vector<int>& widths() const { return widths_; }
  Activation activation() const { return act_; }
  int input_dim() const { return widths_.front(); }

  static std::size_t param_count_of(const std::vector<int>& widths) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
      n += static_cast<std::size_t>(widths[l + 1]) * widths[l] + widths[l + 1];
    return n;
  }
  std::size_t param_count() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Forward pass over an external parameter slice. `x` must have input_dim
  // entries, each a jet sharing one sweep variable.
  template <class S>
  ad::Jet2<S> forward(std::span<const S> p, const ad::Jet2<S>* x,
                      int xdim) const {
    if (xdim != widths_.front())
      throw ContractError("network input dimension mismatch");
    if (p.size() != params_.size())
      throw ContractError("network parameter slice has wrong length");

    std::array<ad::Jet2<S>, kMaxWidth> cur, nxt;
    for (int i = 0; i < xdim; ++i) cur[static_cast<std::size_t>(i)] = x[i];

    std::size_t pos = 0;
    int in_w = widths_.front();
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      const int out_w = widths_[l + 1];
      const bool last = (l + 2 == widths_.size());
      const std::size_t wbase = pos;
      const std::size_t bbase = pos + static_cast<std::size_t>(out_w) * in_w;
      for (int j = 0; j < out_w; ++j) {
        ad::Jet2<S> acc = ad::jet_const(p[bbase + static_cast<std::size_t>(j)]);
        const std::size_t row = wbase + static_cast<std::size_t>(j) * in_w;
        for (int i = 0; i < in_w; ++i) {
          const S& w = p[row + static_cast<std::size_t>(i)];
          const ad::Jet2<S>& xi = cur[static_cast<std::size_t>(i)];
          acc.v = ad::fma(w, xi.v, acc.v);
          acc.d1 = ad::fma(w, xi.d1, acc.d1);
          acc.d2 = ad::fma(w, xi.d2, acc.d2);
        }
        if (!last) {
          switch (act_) {
            case Activation::Tanh: acc = ad::tanh(acc); break;
            case Activation::Sigmoid: acc = ad::sigmoid(acc); break;
            case Activation::Swish: acc = ad::silu(acc); break;
          }
        }
        nxt[static_cast<std::size_t>(j)] = acc;
      }
      std::swap(cur, nxt);
      in_w = out_w;
      pos = bbase + static_cast<std::size_t>(out_w);
    }
    return cur[0];
  }

  // Convenience evaluation against the network's own parameters.
  ad::Jet2d forward(const ad::Jet2d* x, int xdim) const {
    return forward<double>(params_, x, xdim);
  }
  double value(double x) const {
    ad::Jet2d j = ad::jet_var(x);
    return forward(&j, 1).v;
  }

 private:
  std::vector<int> widths_;
  Activation act_ = Activation::Tanh;
  std::vector<double> params_;
};

}  // namespace hcpinn
