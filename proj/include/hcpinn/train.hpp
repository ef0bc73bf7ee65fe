#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcpinn/adam.hpp"
#include "hcpinn/errors.hpp"
#include "hcpinn/problems1d.hpp"
#include "hcpinn/problems2d.hpp"
#include "hcpinn/reference2d.hpp"
#include "hcpinn/tape.hpp"

// Training driver. The loss is an arbitrary scalar builder over Rev
// parameters, so the same loop serves every model kind; buffer models bake
// their linear solve into the builder and the solve is differentiated
// through like everything else. The loop is deterministic: no RNG, fixed
// reduction order, and a serial optimizer.

namespace hcpinn {

enum class AnsatzKind { Window, Buffer, SoftPhi, SoftMultinet };

inline std::string_view ansatz_kind_name(AnsatzKind k) {
  switch (k) {
    case AnsatzKind::Window: return "window";
    case AnsatzKind::Buffer: return "buffer";
    case AnsatzKind::SoftPhi: return "soft_phi";
    case AnsatzKind::SoftMultinet: return "soft_multinet";
  }
  throw ConfigError("unknown ansatz kind");
}

inline AnsatzKind ansatz_kind_from(std::string_view name) {
  if (name == "window") return AnsatzKind::Window;
  if (name == "buffer") return AnsatzKind::Buffer;
  if (name == "soft_phi") return AnsatzKind::SoftPhi;
  if (name == "soft_multinet") return AnsatzKind::SoftMultinet;
  throw ConfigError("unknown ansatz kind '" + std::string(name) + "'");
}

// Weights for the four soft loss terms. "Absent" is meaningful: models that
// enforce a condition by construction must not carry a weight for it, and
// the assembly helpers below turn a stray weight into a config error rather
// than silently evaluating a redundant loss.
struct SoftWeights {
  std::optional<double> dbc;
  std::optional<double> nbc;
  std::optional<double> itf_value;
  std::optional<double> itf_flux;

  bool any() const {
    return dbc || nbc || itf_value || itf_flux;
  }
  bool any_interface() const { return itf_value || itf_flux; }

  bool operator==(const SoftWeights&) const = default;
};

struct TrainConfig {
  AnsatzKind kind = AnsatzKind::Window;
  std::size_t iterations = 30000;
  double learning_rate = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::size_t eval_cadence = 500;
  SoftWeights weights;

  AdamConfig adam() const {
    return {learning_rate, beta1, beta2, epsilon};
  }

  void validate() const {
    if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
      throw ConfigError("Adam betas must lie in [0, 1)");
    if (epsilon <= 0.0) throw ConfigError("Adam epsilon must be positive");
    if (eval_cadence == 0) throw ConfigError("eval cadence must be positive");
  }

  bool operator==(const TrainConfig&) const = default;
};

// For fully hard models: every condition is built in, so no soft weight may
// be present.
inline void require_no_soft_weights(const TrainConfig& cfg,
                                    std::string_view model) {
  if (cfg.weights.any())
    throw ConfigError(std::string(model) +
                      " enforces all conditions by construction; soft-loss "
                      "weights must be absent");
}

// For models with a hard interface but soft boundaries.
inline void require_no_interface_weights(const TrainConfig& cfg,
                                         std::string_view model) {
  if (cfg.weights.any_interface())
    throw ConfigError(std::string(model) +
                      " enforces the interface conditions by construction; "
                      "interface loss weights must be absent");
}

struct TrainReport {
  // config echo
  AnsatzKind kind = AnsatzKind::Window;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::size_t eval_cadence = 500;
  double learning_rate = 0.0;

  // sampled at iteration 0, every eval_cadence steps, and the final iterate
  std::vector<std::size_t> history_iters;
  std::vector<double> loss_history;
  std::vector<double> metric_history;

  std::size_t iterations_run = 0;  // optimizer steps reflected in theta
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double final_metric = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

struct TrainResult {
  TrainReport report;
  std::vector<double> theta;
};

// Runs Adam on `loss`, starting from `theta`. `metric` maps a parameter
// vector to a scalar quality measure (relative L2 against a reference, or
// anything cheap enough to evaluate at the history cadence).
//
// A NaN in the loss value or gradient aborts the run: theta is rolled back
// to the last iterate that evaluated cleanly and the report says why. With
// iterations == 0 the loop only records the initial metrics.
template <class Loss, class Metric>
TrainResult train_loop(Loss&& loss, std::vector<double> theta,
                       const TrainConfig& cfg, Metric&& metric) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  TrainResult out;
  TrainReport& rep = out.report;
  rep.kind = cfg.kind;
  rep.iterations = cfg.iterations;
  rep.seed = cfg.seed;
  rep.eval_cadence = cfg.eval_cadence;
  rep.learning_rate = cfg.learning_rate;

  Adam opt(cfg.adam(), theta.size());
  std::vector<double> grad(theta.size());
  std::vector<double> last_good = theta;

  // One tape pass: loss value, and the gradient when `g` is given. Returns
  // NaN instead of throwing so the loop can roll back; domain errors from
  // the evaluation (sqrt of a negative, |x| at its kink) count as NaN too,
  // since they are data-dependent blowups, not configuration mistakes.
  std::string eval_error;
  const auto evaluate = [&](std::span<const double> th,
                            std::vector<double>* g) -> double {
    eval_error.clear();
    try {
      ad::Tape tape;
      std::vector<ad::Rev> leaves;
      leaves.reserve(th.size());
      for (double t : th) leaves.push_back(tape.leaf(t));
      const ad::Rev y = loss(std::span<const ad::Rev>(leaves));
      if (tape.first_nan_node() >= 0 || std::isnan(y.v))
        return std::numeric_limits<double>::quiet_NaN();
      if (g) {
        tape.seed(y, 1.0);
        tape.propagate(0);
        for (std::size_t i = 0; i < th.size(); ++i) {
          (*g)[i] = tape.adjoint_of(leaves[i]);
          if (std::isnan((*g)[i]))
            return std::numeric_limits<double>::quiet_NaN();
        }
      }
      return y.v;
    } catch (const EvalError& e) {
      eval_error = e.what();
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  for (std::size_t it = 0; it <= cfg.iterations; ++it) {
    const bool final_iter = it == cfg.iterations;
    const double value = evaluate(theta, final_iter ? nullptr : &grad);
    if (std::isnan(value)) {
      rep.aborted = true;
      rep.abort_reason =
          "NaN in loss or gradient at iteration " + std::to_string(it);
      if (!eval_error.empty())
        rep.abort_reason += " (" + eval_error + ")";
      theta = last_good;
      rep.iterations_run = it == 0 ? 0 : it - 1;
      const double recovered = evaluate(theta, nullptr);
      rep.final_loss = recovered;
      rep.final_metric = metric(std::span<const double>(theta));
      break;
    }
    if (it % cfg.eval_cadence == 0 || final_iter) {
      rep.history_iters.push_back(it);
      rep.loss_history.push_back(value);
      rep.metric_history.push_back(metric(std::span<const double>(theta)));
    }
    if (final_iter) {
      rep.iterations_run = it;
      rep.final_loss = value;
      rep.final_metric = rep.metric_history.back();
      break;
    }
    last_good = theta;
    opt.step(theta, grad);
  }

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  out.theta = std::move(theta);
  return out;
}

// Relative L2 distance to the 1D oracle on a midpoint grid (midpoints keep
// samples off the interfaces, where the oracle is one-sided).
template <class Field>
double relative_l2_1d(const Problem1D& problem, Field&& u,
                      std::size_t samples = 1000) {
  if (samples == 0) throw ConfigError("need at least one metric sample");
  const double lo = problem.breaks.front();
  const double hi = problem.breaks.back();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x =
        lo + (hi - lo) * (static_cast<double>(i) + 0.5) /
                 static_cast<double>(samples);
    const double ref = problem.oracle(x, 0);
    const double d = u(x) - ref;
    num += d * d;
    den += ref * ref;
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// Relative L2 distance between a model field and a gridded reference,
// sampled on a midpoint grid over the problem rectangle.
template <class Field>
double relative_l2_2d(const Problem2D& problem, const Field2D& ref, Field&& u,
                      std::size_t nx = 100, std::size_t ny = 100) {
  if (nx == 0 || ny == 0) throw ConfigError("need a nonempty metric grid");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    const double y = problem.ymin +
                     (problem.ymax - problem.ymin) *
                         (static_cast<double>(j) + 0.5) /
                         static_cast<double>(ny);
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = problem.xmin +
                       (problem.xmax - problem.xmin) *
                           (static_cast<double>(i) + 0.5) /
                           static_cast<double>(nx);
      const double r = ref.value(x, y);
      const double d = u(x, y) - r;
      num += d * d;
      den += r * r;
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace hcpinn
