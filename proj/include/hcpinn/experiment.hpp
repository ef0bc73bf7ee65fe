#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "hcpinn/artifacts.hpp"
#include "hcpinn/baselines.hpp"
#include "hcpinn/buffer1d.hpp"
#include "hcpinn/buffer2d.hpp"
#include "hcpinn/collocation.hpp"
#include "hcpinn/config.hpp"
#include "hcpinn/losses.hpp"
#include "hcpinn/problems1d.hpp"
#include "hcpinn/problems2d.hpp"
#include "hcpinn/reference2d.hpp"
#include "hcpinn/svg.hpp"
#include "hcpinn/train.hpp"
#include "hcpinn/window_ansatz1d.hpp"
#include "hcpinn/window_ansatz2d.hpp"

// Experiment assembly: configuration in, trained model and artifacts out.
// Each ansatz kind gets its own small assembly branch (the buffer kinds
// must solve for their DOFs inside the loss, the soft kinds add weighted
// penalty terms, the fully hard 2D mode swaps in the polar residual), and
// everything downstream of training (metrics, constraint diagnostics,
// artifact files) is shared.

namespace hcpinn {

inline bool problem_is_2d(const std::string& id) { return id == "p4"; }

inline Problem1D problem_1d(const std::string& id) {
  if (id == "p1") return problem1();
  if (id == "p2") return problem2();
  if (id == "p3") return problem3();
  throw ConfigError("'" + id + "' is not a 1D problem id");
}

inline Problem2D problem_2d(const std::string& id) {
  if (id == "p4") return problem4();
  throw ConfigError("'" + id + "' is not a 2D problem id");
}

// Distinct, deterministic seed per network.
inline std::uint64_t net_seed(std::uint64_t base, std::size_t index) {
  return base * 1000003ull + index + 1;
}

// Double-precision evaluation facades over the trained model, used by the
// constraint diagnostics and profile writers. The callables reference the
// model and parameter storage owned by the caller.
struct Eval1D {
  // jet(x): value/derivatives at x (upper side on breaks).
  std::function<ad::Jet2<double>(double)> jet;
  // jet_on(m, x): the subdomain-m branch, for one-sided interface limits.
  std::function<ad::Jet2<double>(std::size_t, double)> jet_on;
};

struct Eval2D {
  // jet(x, y, axis): directional jet along a coordinate axis.
  std::function<ad::Jet2<double>(double, double, int)> jet;
  // jet_on(m, x, y, dir): subdomain-m branch along unit dir. Only the value
  // and first derivative are guaranteed (the buffer facade synthesizes the
  // direction from axis jets).
  std::function<ad::Jet2<double>(std::size_t, double, double, Point2)> jet_on;
};

struct ConditionStats {
  std::string name;
  double max_abs = 0.0;
  double mean_abs = 0.0;
  std::size_t count = 0;
};

struct ConstraintReport {
  std::vector<ConditionStats> conditions;

  const ConditionStats* find(std::string_view name) const {
    for (const auto& c : conditions)
      if (c.name == name) return &c;
    return nullptr;
  }
  double worst() const {
    double w = 0.0;
    for (const auto& c : conditions) w = std::max(w, c.max_abs);
    return w;
  }
};

struct ProfileSample {
  double x = 0.0, y = 0.0;
  double u = 0.0, u_ref = 0.0;
  double lhs = 0.0, source = 0.0;  // strong-form LHS vs f, for residual plots
};

struct RunOutcome {
  ExperimentConfig config;
  std::string hash;
  TrainReport report;
  std::vector<double> theta;
  std::vector<ProfileSample> profile;
  ConstraintReport constraints;
};

namespace detail {

inline void add_stat(ConditionStats& c, double residual) {
  const double r = std::abs(residual);
  c.max_abs = std::max(c.max_abs, r);
  c.mean_abs += r;
  ++c.count;
}

inline void push_stat(ConstraintReport& rep, ConditionStats c) {
  if (c.count > 0) c.mean_abs /= static_cast<double>(c.count);
  rep.conditions.push_back(std::move(c));
}

// Side hint selecting the subdomain-m branch of a 1D model at x: only
// meaningful when x sits on an interior break.
inline Side side_for(const Problem1D& p, std::size_t m, double x) {
  for (std::size_t j = 1; j + 1 < p.breaks.size(); ++j)
    if (std::abs(x - p.breaks[j]) < 1e-12)
      return m + 1 == j ? Side::Below : Side::Above;
  return Side::Auto;
}

inline std::vector<Mlp> make_nets(const ExperimentConfig& cfg, int input,
                                  std::size_t count) {
  std::vector<int> widths;
  widths.push_back(input);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(1);
  std::vector<Mlp> nets;
  nets.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    nets.push_back(
        Mlp::create(widths, cfg.activation, cfg.init, net_seed(cfg.train.seed, i)));
  return nets;
}

// ---- 1D constraint and profile diagnostics -------------------------------

inline ConstraintReport constraints_1d(const Problem1D& p, const Eval1D& ev) {
  ConstraintReport rep;
  const auto bc_stat = [&](const std::string& where,
                           const BoundaryCondition1D& bc, std::size_t m,
                           double x) {
    ConditionStats c{where + (bc.type == BcType::Dirichlet ? "_dirichlet"
                                                           : "_neumann")};
    const auto j = ev.jet_on(m, x);
    add_stat(c, bc.type == BcType::Dirichlet ? j.v - bc.value
                                             : j.d1 - bc.value);
    push_stat(rep, std::move(c));
  };
  bc_stat("left", p.left, 0, p.breaks.front());
  bc_stat("right", p.right, p.subdomains() - 1, p.breaks.back());

  const auto itf = p.interfaces();
  for (std::size_t i = 0; i < itf.size(); ++i) {
    const auto lo = ev.jet_on(i, itf[i]);
    const auto hi = ev.jet_on(i + 1, itf[i]);
    const double vjump = p.value_jump.empty() ? 0.0 : p.value_jump[i];
    const double fjump = p.flux_jump.empty() ? 0.0 : p.flux_jump[i];
    ConditionStats cv{"interface_" + std::to_string(i) + "_value"};
    add_stat(cv, hi.v - lo.v - vjump);
    push_stat(rep, std::move(cv));
    ConditionStats cf{"interface_" + std::to_string(i) + "_flux"};
    add_stat(cf, p.kappa[i + 1] * hi.d1 - p.kappa[i] * lo.d1 - fjump);
    push_stat(rep, std::move(cf));
  }
  return rep;
}

inline std::vector<ProfileSample> profile_1d(const Problem1D& p,
                                             const Eval1D& ev,
                                             std::size_t n = 501) {
  std::vector<ProfileSample> rows;
  rows.reserve(n);
  const double lo = p.breaks.front(), hi = p.breaks.back();
  for (std::size_t i = 0; i < n; ++i) {
    const double x =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    const auto j = ev.jet(x);
    ProfileSample s;
    s.x = x;
    s.u = j.v;
    s.u_ref = p.oracle(x, 0);
    s.lhs = -p.kappa_at(x) * j.d2;
    s.source = p.source(x);
    rows.push_back(s);
  }
  return rows;
}

// ---- 2D constraint and profile diagnostics -------------------------------

inline ConstraintReport constraints_2d(const Problem2D& p, const Eval2D& ev,
                                       std::size_t per_segment = 256,
                                       std::size_t on_interface = 256) {
  ConstraintReport rep;
  for (std::size_t s = 0; s < p.boundary.size(); ++s) {
    const auto& seg = p.boundary[s];
    ConditionStats c{"segment_" + std::to_string(s) +
                     (seg.type == BcType::Dirichlet ? "_dirichlet"
                                                    : "_neumann")};
    for (std::size_t i = 0; i < per_segment; ++i) {
      const auto pt = seg.at((static_cast<double>(i) + 0.5) /
                             static_cast<double>(per_segment));
      const std::size_t m = p.subdomain_of(pt.x, pt.y);
      const auto j = ev.jet_on(m, pt.x, pt.y, seg.normal);
      add_stat(c, seg.type == BcType::Dirichlet
                      ? j.v - seg.value
                      : p.kappa[m] * j.d1 - seg.value);
    }
    push_stat(rep, std::move(c));
  }
  ConditionStats cv{"interface_value"}, cf{"interface_flux"};
  const Point2 n = p.itf_normal_left();
  for (std::size_t i = 0; i < on_interface; ++i) {
    const auto pt = p.itf_point((static_cast<double>(i) + 0.5) /
                                static_cast<double>(on_interface));
    const auto lo = ev.jet_on(0, pt.x, pt.y, n);
    const auto hi = ev.jet_on(1, pt.x, pt.y, n);
    add_stat(cv, lo.v - hi.v);
    add_stat(cf, p.kappa[0] * lo.d1 - p.kappa[1] * hi.d1);
  }
  push_stat(rep, std::move(cv));
  push_stat(rep, std::move(cf));
  return rep;
}

// Residuals at the buffer's own enforcement points; these are exact up to
// the linear solve, unlike the dense between-sample profile above.
inline void append_buffer_sample_stats(const Problem2D& p,
                                       const BufferAnsatz2D& model,
                                       const Eval2D& ev,
                                       ConstraintReport& rep) {
  ConditionStats cd{"samples_dirichlet"}, cn{"samples_neumann"};
  ConditionStats cv{"samples_interface_value"}, cf{"samples_interface_flux"};
  const Point2 nitf = p.itf_normal_left();
  for (std::size_t m = 0; m < 2; ++m) {
    for (const auto& s : model.samples(m)) {
      switch (s.kind) {
        case SampleKind::Dirichlet: {
          const auto& seg = p.boundary_condition(s.pos.x, s.pos.y);
          add_stat(cd, ev.jet_on(m, s.pos.x, s.pos.y, Point2{1.0, 0.0}).v -
                           seg.value);
          break;
        }
        case SampleKind::Neumann: {
          const auto& seg = p.boundary_condition(s.pos.x, s.pos.y);
          const auto j = ev.jet_on(m, s.pos.x, s.pos.y, s.normal);
          add_stat(cn, p.kappa[m] * j.d1 - seg.value);
          break;
        }
        case SampleKind::Interface: {
          if (m != 0) break;  // both sides probed below; count pairs once
          const auto lo = ev.jet_on(0, s.pos.x, s.pos.y, nitf);
          const auto hi = ev.jet_on(1, s.pos.x, s.pos.y, nitf);
          add_stat(cv, lo.v - hi.v);
          add_stat(cf, p.kappa[0] * lo.d1 - p.kappa[1] * hi.d1);
          break;
        }
      }
    }
  }
  push_stat(rep, std::move(cd));
  push_stat(rep, std::move(cn));
  push_stat(rep, std::move(cv));
  push_stat(rep, std::move(cf));
}

// Midpoint grid: corner window nodes are radially singular, so the profile
// stays strictly inside the domain.
inline std::vector<ProfileSample> profile_2d(const Problem2D& p,
                                             const Field2D& ref,
                                             const Eval2D& ev,
                                             std::size_t nx = 101,
                                             std::size_t ny = 51) {
  std::vector<ProfileSample> rows;
  rows.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double y = p.ymin + (p.ymax - p.ymin) *
                                  (static_cast<double>(j) + 0.5) /
                                  static_cast<double>(ny);
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = p.xmin + (p.xmax - p.xmin) *
                                    (static_cast<double>(i) + 0.5) /
                                    static_cast<double>(nx);
      const auto jx = ev.jet(x, y, 0);
      const auto jy = ev.jet(x, y, 1);
      ProfileSample s;
      s.x = x;
      s.y = y;
      s.u = jx.v;
      s.u_ref = ref.value(x, y);
      s.lhs = -p.kappa_at(x, y) * (jx.d2 + jy.d2);
      s.source = p.source(x, y);
      rows.push_back(s);
    }
  }
  return rows;
}

// ---- facades -------------------------------------------------------------

inline Eval1D facade(const WindowAnsatz1D& m, const Problem1D& p,
                     std::span<const double> th) {
  return {[&m, th](double x) { return m.eval(th, ad::jet_var(x)); },
          [&m, &p, th](std::size_t sd, double x) {
            return m.eval(th, ad::jet_var(x), side_for(p, sd, x));
          }};
}

inline Eval1D facade(const BufferAnsatz1D& m, const Problem1D& p,
                     std::span<const double> th) {
  auto st = std::make_shared<BufferAnsatz1D::State<double>>(m.solve(th));
  return {[&m, th, st](double x) { return m.eval(th, *st, ad::jet_var(x)); },
          [&m, &p, th, st](std::size_t sd, double x) {
            return m.eval(th, *st, ad::jet_var(x), side_for(p, sd, x));
          }};
}

inline Eval1D facade(const PhiPinn1D& m, std::span<const double> th) {
  return {[&m, th](double x) { return m.eval(th, x); },
          [&m, th](std::size_t sd, double x) { return m.eval_on(sd, th, x); }};
}

inline Eval1D facade(const MultiNet1D& m, std::span<const double> th) {
  return {[&m, th](double x) { return m.eval(th, x); },
          [&m, th](std::size_t sd, double x) { return m.eval_on(sd, th, x); }};
}

template <class WindowModel2D>
inline Eval2D window_facade(const WindowModel2D& m, std::span<const double> th) {
  return {[&m, th](double x, double y, int axis) {
            return m.eval(th, x, y, axis);
          },
          [&m, th](std::size_t sd, double x, double y, Point2 dir) {
            return m.eval_on(sd, th, x, y, dir);
          }};
}

inline Eval2D facade(const BufferAnsatz2D& m, std::span<const double> th) {
  auto st = std::make_shared<BufferAnsatz2D::State<double>>(m.solve(th));
  return {[&m, th, st](double x, double y, int axis) {
            return m.eval(th, *st, x, y, axis);
          },
          [&m, th, st](std::size_t sd, double x, double y, Point2 dir) {
            const auto jx = m.eval_on(sd, th, *st, x, y, 0);
            const auto jy = m.eval_on(sd, th, *st, x, y, 1);
            return ad::Jet2<double>{jx.v, dir.x * jx.d1 + dir.y * jy.d1, 0.0};
          }};
}

inline Eval2D facade(const PhiPinn2D& m, std::span<const double> th) {
  return {[&m, th](double x, double y, int axis) {
            return m.eval(th, x, y, axis);
          },
          [&m, th](std::size_t sd, double x, double y, Point2 dir) {
            return m.eval_on(sd, th, x, y, dir);
          }};
}

inline Eval2D facade(const MultiNet2D& m, std::span<const double> th) {
  return {[&m, th](double x, double y, int axis) {
            return m.eval(th, x, y, axis);
          },
          [&m, th](std::size_t sd, double x, double y, Point2 dir) {
            return m.eval_on(sd, th, x, y, dir);
          }};
}

// ---- model factories (shared between run and verify) ---------------------

inline WindowAnsatz1D make_window_1d(const ExperimentConfig& cfg,
                                     const Problem1D& p) {
  return WindowAnsatz1D(p,
                        make_window_layout(p, cfg.beta, cfg.k_interior,
                                           cfg.k_dirichlet, cfg.k_neumann),
                        make_nets(cfg, 1, p.subdomains()));
}

inline BufferAnsatz1D make_buffer_1d(const ExperimentConfig& cfg,
                                     const Problem1D& p) {
  return BufferAnsatz1D(p, make_nets(cfg, 1, p.subdomains()));
}

inline PhiPinn1D make_phi_1d(const ExperimentConfig& cfg, const Problem1D& p) {
  return PhiPinn1D(p, make_nets(cfg, 2, 1).front());
}

inline MultiNet1D make_multinet_1d(const ExperimentConfig& cfg,
                                   const Problem1D& p) {
  return MultiNet1D(p, make_nets(cfg, 1, p.subdomains()));
}

inline BufferAnsatz2D make_buffer_2d(const ExperimentConfig& cfg,
                                     const Problem2D& p) {
  return BufferAnsatz2D(p, make_nets(cfg, 2, 2), cfg.edge_samples,
                        cfg.interface_samples, cfg.r0);
}

inline WindowAnsatz2D make_window_io_2d(const ExperimentConfig& cfg,
                                        const Problem2D& p) {
  WindowAnsatz2D::Config wc;
  wc.normal_extent = cfg.normal_extent;
  wc.k_int = cfg.k_interior;
  wc.k_d = cfg.k_dirichlet;
  wc.k_n = cfg.k_neumann;
  auto interior = make_nets(cfg, 2, 2);
  std::vector<Mlp> tangential;
  {
    ExperimentConfig tcfg = cfg;
    tcfg.train.seed = net_seed(cfg.train.seed, 7);
    tangential = make_nets(tcfg, 1, 2);
  }
  return WindowAnsatz2D(p, std::move(interior), std::move(tangential), wc);
}

inline FullWindowAnsatz2D make_window_fh_2d(const ExperimentConfig& cfg,
                                            const Problem2D& p) {
  auto layout = full_window_layout(p);
  std::size_t slots = 0;
  for (const auto& e : layout.edges)
    slots += e.segment < 0 ? 2
                           : 1;  // interface edges train both value and slope
  auto interior = make_nets(cfg, 2, layout.interior.size());
  ExperimentConfig tcfg = cfg;
  tcfg.train.seed = net_seed(cfg.train.seed, 7);
  auto tangential = make_nets(tcfg, 1, slots);
  return FullWindowAnsatz2D(p, std::move(layout), std::move(interior),
                            std::move(tangential));
}

inline PhiPinn2D make_phi_2d(const ExperimentConfig& cfg, const Problem2D& p) {
  return PhiPinn2D(p, make_nets(cfg, 3, 1).front());
}

inline MultiNet2D make_multinet_2d(const ExperimentConfig& cfg,
                                   const Problem2D& p) {
  return MultiNet2D(p, make_nets(cfg, 2, 2));
}

// ---- run branches --------------------------------------------------------

template <class Model, class LossBuilder>
RunOutcome drive_1d(const ExperimentConfig& cfg, const Problem1D& p,
                    Model& model, LossBuilder&& loss,
                    const std::function<double(std::span<const double>)>& metric) {
  TrainConfig tc = cfg.train;
  tc.kind = cfg.kind;
  auto result = train_loop(loss, model.initial_params(), tc, metric);

  RunOutcome out;
  out.config = cfg;
  out.hash = config_hash(cfg);
  out.report = std::move(result.report);
  out.theta = std::move(result.theta);
  Eval1D ev;
  if constexpr (std::is_same_v<Model, PhiPinn1D> ||
                std::is_same_v<Model, MultiNet1D>)
    ev = facade(model, out.theta);
  else
    ev = facade(model, p, out.theta);
  out.profile = profile_1d(p, ev);
  out.constraints = constraints_1d(p, ev);
  return out;
}

template <class Model>
ad::Rev soft_total_1d(const ExperimentConfig& cfg, const Problem1D& p,
                      const CollocationSet1D& set, const Model& model,
                      std::span<const ad::Rev> th) {
  const auto u = [&](double x) { return model.eval(th, x); };
  const auto u_on = [&](std::size_t m, double x) {
    return model.eval_on(m, th, x);
  };
  ad::Rev loss = physics_loss_1d<ad::Rev>(p, set.interior, u);
  const auto s = soft_losses_1d<ad::Rev>(p, set, u_on);
  const auto& w = cfg.train.weights;
  loss = loss + ad::Rev(w.dbc.value_or(1.0)) * s.dbc;
  loss = loss + ad::Rev(w.nbc.value_or(1.0)) * s.nbc;
  loss = loss + ad::Rev(w.itf_value.value_or(1.0)) * s.itf_value;
  loss = loss + ad::Rev(w.itf_flux.value_or(1.0)) * s.itf_flux;
  return loss;
}

inline RunOutcome run_1d(const ExperimentConfig& cfg) {
  const Problem1D p = problem_1d(cfg.problem);
  const auto set = collocation_1d(p, cfg.collocation);
  const auto metric_for = [&p](auto value_fn) {
    return std::function<double(std::span<const double>)>(
        [&p, value_fn](std::span<const double> th) {
          return relative_l2_1d(p, [&](double x) { return value_fn(th, x); });
        });
  };

  switch (cfg.kind) {
    case AnsatzKind::Window: {
      require_no_soft_weights(cfg.train, "the 1D window ansatz");
      auto model = make_window_1d(cfg, p);
      const auto loss = [&](std::span<const ad::Rev> th) {
        return physics_loss_1d<ad::Rev>(p, set.interior, [&](double x) {
          return model.eval(th, ad::jet_var(ad::Rev(x)));
        });
      };
      return drive_1d(cfg, p, model, loss, metric_for([&model](auto th, double x) {
                        return model.value(th, x);
                      }));
    }
    case AnsatzKind::Buffer: {
      require_no_soft_weights(cfg.train, "the buffer ansatz");
      auto model = make_buffer_1d(cfg, p);
      const auto loss = [&](std::span<const ad::Rev> th) {
        const auto state = model.solve(th);
        return physics_loss_1d<ad::Rev>(p, set.interior, [&](double x) {
          return model.eval(th, state, ad::jet_var(ad::Rev(x)));
        });
      };
      const auto metric = std::function<double(std::span<const double>)>(
          [&p, &model](std::span<const double> th) {
            const auto st = model.solve(th);
            return relative_l2_1d(
                p, [&](double x) { return model.value(th, st, x); });
          });
      return drive_1d(cfg, p, model, loss, metric);
    }
    case AnsatzKind::SoftPhi: {
      auto model = make_phi_1d(cfg, p);
      const auto loss = [&](std::span<const ad::Rev> th) {
        return soft_total_1d(cfg, p, set, model, th);
      };
      return drive_1d(cfg, p, model, loss, metric_for([&model](auto th, double x) {
                        return model.value(th, x);
                      }));
    }
    case AnsatzKind::SoftMultinet: {
      auto model = make_multinet_1d(cfg, p);
      const auto loss = [&](std::span<const ad::Rev> th) {
        return soft_total_1d(cfg, p, set, model, th);
      };
      return drive_1d(cfg, p, model, loss, metric_for([&model](auto th, double x) {
                        return model.value(th, x);
                      }));
    }
  }
  throw ConfigError("unknown ansatz kind");
}

template <class Model, class LossBuilder, class MakeEval>
RunOutcome drive_2d(const ExperimentConfig& cfg, const Problem2D& p,
                    const Field2D& ref, Model& model, LossBuilder&& loss,
                    MakeEval&& make_eval) {
  TrainConfig tc = cfg.train;
  tc.kind = cfg.kind;
  const auto metric = [&](std::span<const double> th) {
    const Eval2D ev = make_eval(th);
    return relative_l2_2d(p, ref, [&](double x, double y) {
      return ev.jet(x, y, 0).v;
    });
  };
  auto result = train_loop(loss, model.initial_params(), tc, metric);

  RunOutcome out;
  out.config = cfg;
  out.hash = config_hash(cfg);
  out.report = std::move(result.report);
  out.theta = std::move(result.theta);
  const Eval2D ev = make_eval(std::span<const double>(out.theta));
  out.profile = profile_2d(p, ref, ev);
  out.constraints = constraints_2d(p, ev);
  if constexpr (std::is_same_v<Model, BufferAnsatz2D>)
    append_buffer_sample_stats(p, model, ev, out.constraints);
  return out;
}

template <class Model>
ad::Rev soft_total_2d(const ExperimentConfig& cfg, const Problem2D& p,
                      const CollocationSet2D& set, const Model& model,
                      std::span<const ad::Rev> th) {
  const auto u = [&](double x, double y, int axis) {
    return model.eval(th, x, y, axis);
  };
  const auto u_on = [&](std::size_t m, double x, double y, Point2 dir) {
    return model.eval_on(m, th, x, y, dir);
  };
  ad::Rev loss = physics_loss_2d<ad::Rev>(p, set.interior, u);
  const auto s = soft_losses_2d<ad::Rev>(p, set, u_on);
  const auto& w = cfg.train.weights;
  loss = loss + ad::Rev(w.dbc.value_or(1.0)) * s.dbc;
  loss = loss + ad::Rev(w.nbc.value_or(1.0)) * s.nbc;
  loss = loss + ad::Rev(w.itf_value.value_or(1.0)) * s.itf_value;
  loss = loss + ad::Rev(w.itf_flux.value_or(1.0)) * s.itf_flux;
  return loss;
}

inline RunOutcome run_2d(const ExperimentConfig& cfg) {
  const Problem2D p = problem_2d(cfg.problem);
  const auto set = collocation_2d(p, cfg.collocation_x, cfg.collocation_y,
                                  cfg.boundary_collocation,
                                  cfg.interface_collocation);
  const Field2D ref = reference_solution(p, 161, 81);

  switch (cfg.kind) {
    case AnsatzKind::Buffer: {
      require_no_soft_weights(cfg.train, "the buffer ansatz");
      auto model = make_buffer_2d(cfg, p);
      const auto loss = [&](std::span<const ad::Rev> th) {
        const auto state = model.solve(th);
        return physics_loss_2d<ad::Rev>(
            p, set.interior, [&](double x, double y, int axis) {
              return model.eval(th, state, x, y, axis);
            });
      };
      return drive_2d(cfg, p, ref, model, loss, [&model](auto th) {
        return facade(model, th);
      });
    }
    case AnsatzKind::Window: {
      if (cfg.mode == "full_hard") {
        require_no_soft_weights(cfg.train, "the fully hard window ansatz");
        auto model = make_window_fh_2d(cfg, p);
        // The polar residual about the nearest corner node replaces the
        // Cartesian loss for every collocation point in this mode.
        const auto loss = [&](std::span<const ad::Rev> th) {
          return polar_physics_loss<ad::Rev>(
              p, set.interior, model.layout().corners,
              [&](double x, double y, Point2 dir) {
                return model.eval_dir(th, x, y, dir);
              });
        };
        return drive_2d(cfg, p, ref, model, loss, [&model](auto th) {
          return window_facade(model, th);
        });
      }
      require_no_interface_weights(cfg.train, "the interface window ansatz");
      auto model = make_window_io_2d(cfg, p);
      // Boundaries are soft in this mode; the interface terms are never
      // evaluated (the set used for the soft losses has no interface
      // points, and the interface weights are rejected above).
      CollocationSet2D boundary_only = set;
      boundary_only.interface_pts.clear();
      const auto loss = [&](std::span<const ad::Rev> th) {
        const auto u = [&](double x, double y, int axis) {
          return model.eval(th, x, y, axis);
        };
        const auto u_on = [&](std::size_t m, double x, double y, Point2 dir) {
          return model.eval_on(m, th, x, y, dir);
        };
        ad::Rev loss_v = physics_loss_2d<ad::Rev>(p, set.interior, u);
        const auto s = soft_losses_2d<ad::Rev>(p, boundary_only, u_on);
        const auto& w = cfg.train.weights;
        loss_v = loss_v + ad::Rev(w.dbc.value_or(1.0)) * s.dbc;
        loss_v = loss_v + ad::Rev(w.nbc.value_or(1.0)) * s.nbc;
        return loss_v;
      };
      return drive_2d(cfg, p, ref, model, loss, [&model](auto th) {
        return window_facade(model, th);
      });
    }
    case AnsatzKind::SoftPhi: {
      auto model = make_phi_2d(cfg, p);
      const auto loss = [&](std::span<const ad::Rev> th) {
        return soft_total_2d(cfg, p, set, model, th);
      };
      return drive_2d(cfg, p, ref, model, loss, [&model](auto th) {
        return facade(model, th);
      });
    }
    case AnsatzKind::SoftMultinet: {
      auto model = make_multinet_2d(cfg, p);
      const auto loss = [&](std::span<const ad::Rev> th) {
        return soft_total_2d(cfg, p, set, model, th);
      };
      return drive_2d(cfg, p, ref, model, loss, [&model](auto th) {
        return facade(model, th);
      });
    }
  }
  throw ConfigError("unknown ansatz kind");
}

}  // namespace detail

inline RunOutcome run_experiment(const ExperimentConfig& cfg) {
  return problem_is_2d(cfg.problem) ? detail::run_2d(cfg)
                                    : detail::run_1d(cfg);
}

// Constraint diagnostics for an arbitrary parameter vector (typically a
// loaded checkpoint). The model is rebuilt exactly as run_experiment would.
inline ConstraintReport evaluate_constraints(const ExperimentConfig& cfg,
                                             std::span<const double> theta) {
  const auto check_size = [&](std::size_t want) {
    if (theta.size() != want)
      throw ConfigError("parameter vector has " + std::to_string(theta.size()) +
                        " entries, the model needs " + std::to_string(want));
  };
  if (!problem_is_2d(cfg.problem)) {
    const Problem1D p = problem_1d(cfg.problem);
    switch (cfg.kind) {
      case AnsatzKind::Window: {
        const auto model = detail::make_window_1d(cfg, p);
        check_size(model.param_count());
        return detail::constraints_1d(p, detail::facade(model, p, theta));
      }
      case AnsatzKind::Buffer: {
        const auto model = detail::make_buffer_1d(cfg, p);
        check_size(model.param_count());
        return detail::constraints_1d(p, detail::facade(model, p, theta));
      }
      case AnsatzKind::SoftPhi: {
        const auto model = detail::make_phi_1d(cfg, p);
        check_size(model.param_count());
        return detail::constraints_1d(p, detail::facade(model, theta));
      }
      case AnsatzKind::SoftMultinet: {
        const auto model = detail::make_multinet_1d(cfg, p);
        check_size(model.param_count());
        return detail::constraints_1d(p, detail::facade(model, theta));
      }
    }
    throw ConfigError("unknown ansatz kind");
  }
  const Problem2D p = problem_2d(cfg.problem);
  switch (cfg.kind) {
    case AnsatzKind::Buffer: {
      const auto model = detail::make_buffer_2d(cfg, p);
      check_size(model.param_count());
      const auto ev = detail::facade(model, theta);
      auto rep = detail::constraints_2d(p, ev);
      detail::append_buffer_sample_stats(p, model, ev, rep);
      return rep;
    }
    case AnsatzKind::Window: {
      if (cfg.mode == "full_hard") {
        const auto model = detail::make_window_fh_2d(cfg, p);
        check_size(model.param_count());
        return detail::constraints_2d(p, detail::window_facade(model, theta));
      }
      const auto model = detail::make_window_io_2d(cfg, p);
      check_size(model.param_count());
      return detail::constraints_2d(p, detail::window_facade(model, theta));
    }
    case AnsatzKind::SoftPhi: {
      const auto model = detail::make_phi_2d(cfg, p);
      check_size(model.param_count());
      return detail::constraints_2d(p, detail::facade(model, theta));
    }
    case AnsatzKind::SoftMultinet: {
      const auto model = detail::make_multinet_2d(cfg, p);
      check_size(model.param_count());
      return detail::constraints_2d(p, detail::facade(model, theta));
    }
  }
  throw ConfigError("unknown ansatz kind");
}

// ---- artifacts -----------------------------------------------------------

inline std::string profile_csv(const RunOutcome& out) {
  const bool two_d = problem_is_2d(out.config.problem);
  std::ostringstream csv;
  csv << artifact_preamble(out.hash, out.report.seed);
  csv << (two_d ? "x,y,u_pred,u_ref,abs_err\n" : "x,u_pred,u_ref,abs_err\n");
  for (const auto& s : out.profile) {
    csv << g17(s.x) << ",";
    if (two_d) csv << g17(s.y) << ",";
    csv << g17(s.u) << "," << g17(s.u_ref) << ","
        << g17(std::abs(s.u - s.u_ref)) << "\n";
  }
  return csv.str();
}

inline std::string residual_csv(const RunOutcome& out) {
  const bool two_d = problem_is_2d(out.config.problem);
  std::ostringstream csv;
  csv << artifact_preamble(out.hash, out.report.seed);
  csv << (two_d ? "x,y,lhs,source\n" : "x,lhs,source\n");
  for (const auto& s : out.profile) {
    csv << g17(s.x) << ",";
    if (two_d) csv << g17(s.y) << ",";
    csv << g17(s.lhs) << "," << g17(s.source) << "\n";
  }
  return csv.str();
}

inline std::string constraints_csv(const ConstraintReport& rep,
                                   const std::string& hash,
                                   std::uint64_t seed) {
  std::ostringstream csv;
  csv << artifact_preamble(hash, seed);
  csv << "condition,max_abs,mean_abs,count\n";
  for (const auto& c : rep.conditions)
    csv << c.name << "," << g17(c.max_abs) << "," << g17(c.mean_abs) << ","
        << c.count << "\n";
  return csv.str();
}

namespace detail {

// A single profile row sequence for plotting: the 1D profile itself, or the
// 2D midline cut (the row whose y is nearest the domain's middle).
inline std::vector<const ProfileSample*> plot_rows(const RunOutcome& out) {
  std::vector<const ProfileSample*> rows;
  if (!problem_is_2d(out.config.problem)) {
    for (const auto& s : out.profile) rows.push_back(&s);
    return rows;
  }
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  for (const auto& s : out.profile) {
    ylo = std::min(ylo, s.y);
    yhi = std::max(yhi, s.y);
  }
  const double mid = 0.5 * (ylo + yhi);
  double best = std::numeric_limits<double>::infinity();
  double best_y = 0.0;
  for (const auto& s : out.profile) {
    const double d = std::abs(s.y - mid);
    if (d < best) {
      best = d;
      best_y = s.y;
    }
  }
  for (const auto& s : out.profile)
    if (s.y == best_y) rows.push_back(&s);
  return rows;
}

}  // namespace detail

inline void write_run_artifacts(const RunOutcome& out,
                                const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_text_file(dir / "report.json",
                  train_report_json(out.config, out.report, out.hash).dump(1) +
                      "\n");
  write_text_file(dir / "history.csv", history_csv(out.report, out.hash));
  write_text_file(dir / "profile.csv", profile_csv(out));
  write_text_file(dir / "residual.csv", residual_csv(out));
  write_text_file(dir / "constraints.csv",
                  constraints_csv(out.constraints, out.hash, out.report.seed));
  write_checkpoint(dir / "checkpoint.json",
                   Checkpoint{out.hash, out.report.seed, out.config.problem,
                              std::string(ansatz_kind_name(out.config.kind)),
                              out.theta});

  const auto rows = detail::plot_rows(out);
  svg::Series pred{"prediction", {}, {}, "#1f6fb4"};
  svg::Series ref{"reference", {}, {}, "#d1495b"};
  svg::Series lhs{"-div(k grad u)", {}, {}, "#1f6fb4"};
  svg::Series src{"source f", {}, {}, "#6aa84f"};
  for (const auto* s : rows) {
    pred.x.push_back(s->x);
    pred.y.push_back(s->u);
    ref.x.push_back(s->x);
    ref.y.push_back(s->u_ref);
    lhs.x.push_back(s->x);
    lhs.y.push_back(s->lhs);
    src.x.push_back(s->x);
    src.y.push_back(s->source);
  }
  svg::write_line_plot((dir / "solution.svg").string(),
                       "solution overlay (" + out.config.problem + ")", "x",
                       "u", {pred, ref});
  svg::write_line_plot((dir / "residual.svg").string(),
                       "strong-form LHS vs source", "x", "value", {lhs, src});
  std::vector<std::string> labels;
  std::vector<double> values;
  for (const auto& c : out.constraints.conditions) {
    labels.push_back(c.name);
    values.push_back(c.max_abs);
  }
  svg::write_bar_chart((dir / "constraints.svg").string(),
                       "constraint residual maxima", labels, values);
}

// ---- sweeps --------------------------------------------------------------

struct SweepRow {
  std::string value;
  int k_interior = 0;  // populated by the window_k axis
  double final_relative_l2 = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double sweep_number(const std::string& axis, const std::string& text) {
  try {
    std::size_t used = 0;
    const double d = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("sweep axis '" + axis + "': '" + text +
                      "' is not a number");
  }
}

}  // namespace detail

inline std::vector<ExperimentConfig> sweep_points(
    const ExperimentConfig& base, const std::string& axis,
    const std::vector<std::string>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const bool window_1d =
      base.kind == AnsatzKind::Window && !problem_is_2d(base.problem);
  std::vector<ExperimentConfig> points;
  if (axis == "beta") {
    if (!window_1d)
      throw ConfigError(
          "sweep axis 'beta' only applies to the 1D window ansatz");
    for (const auto& v : values) {
      ExperimentConfig c = base;
      c.beta = detail::sweep_number(axis, v);
      points.push_back(std::move(c));
    }
  } else if (axis == "window_k") {
    if (!window_1d)
      throw ConfigError(
          "sweep axis 'window_k' only applies to the 1D window ansatz");
    for (const auto& v : values) {
      const double k = detail::sweep_number(axis, v);
      if (k != 1.0 && k != 2.0 && k != 3.0)
        throw ConfigError("window order must be 1, 2, or 3");
      for (int k_int = 1; k_int <= 3; ++k_int) {
        ExperimentConfig c = base;
        c.k_dirichlet = c.k_neumann = static_cast<int>(k);
        c.k_interior = k_int;
        points.push_back(std::move(c));
      }
    }
  } else if (axis == "init_scheme") {
    for (const auto& v : values) {
      ExperimentConfig c = base;
      c.init = parse_init(v, base.init.param);
      points.push_back(std::move(c));
    }
  } else if (axis == "seed") {
    for (const auto& v : values) {
      const double s = detail::sweep_number(axis, v);
      if (s < 0.0 || s != std::floor(s))
        throw ConfigError("seeds must be non-negative integers");
      ExperimentConfig c = base;
      c.train.seed = static_cast<std::uint64_t>(s);
      points.push_back(std::move(c));
    }
  } else {
    throw ConfigError("unknown sweep axis '" + axis +
                      "' (expected window_k, beta, init_scheme, or seed)");
  }
  return points;
}

inline std::vector<SweepRow> run_sweep(const ExperimentConfig& base,
                                       const std::string& axis,
                                       const std::vector<std::string>& values) {
  const auto points = sweep_points(base, axis, values);
  std::vector<SweepRow> rows;
  rows.reserve(points.size());
  const std::size_t per_value = points.size() / values.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto outcome = run_experiment(points[i]);
    SweepRow row;
    row.value = values[i / per_value];
    row.k_interior = points[i].k_interior;
    row.final_relative_l2 = outcome.report.final_metric;
    row.wall_seconds = outcome.report.wall_seconds;
    row.seed = outcome.report.seed;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string sweep_csv(const std::string& axis,
                             const std::vector<SweepRow>& rows,
                             const std::string& base_hash) {
  std::ostringstream csv;
  csv << "# config_hash = " << base_hash << "\n";
  csv << "axis,value,k_interior,final_relative_l2,wall_seconds,seed\n";
  for (const auto& r : rows)
    csv << axis << "," << r.value << "," << r.k_interior << ","
        << g17(r.final_relative_l2) << "," << g17(r.wall_seconds) << ","
        << r.seed << "\n";
  return csv.str();
}

// ---- verify and oracle ---------------------------------------------------

struct VerifyResult {
  std::string hash;
  std::uint64_t seed = 0;
  ConstraintReport constraints;
};

inline VerifyResult verify_checkpoint(const ExperimentConfig& cfg,
                                      const std::filesystem::path& run_dir) {
  const Checkpoint ck = load_checkpoint(run_dir / "checkpoint.json");
  if (ck.config_hash != config_hash(cfg))
    throw ConfigError(
        "checkpoint was produced by a different configuration (hash " +
        ck.config_hash + ", expected " + config_hash(cfg) + ")");
  VerifyResult out;
  out.hash = ck.config_hash;
  out.seed = ck.seed;
  out.constraints = evaluate_constraints(cfg, ck.theta);
  return out;
}

// Reference-solution dump: the 1D oracle jets, or the FD field for p4.
inline std::string oracle_csv(const std::string& problem,
                              std::size_t samples = 1001) {
  std::ostringstream csv;
  csv << "# problem = " << problem << "\n";
  if (!problem_is_2d(problem)) {
    const Problem1D p = problem_1d(problem);
    csv << "x,u,du,d2u\n";
    const double lo = p.breaks.front(), hi = p.breaks.back();
    for (std::size_t i = 0; i < samples; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) /
                                static_cast<double>(samples - 1);
      const auto j = p.oracle_jet(x, 0);
      csv << g17(x) << "," << g17(j.v) << "," << g17(j.d1) << ","
          << g17(j.d2) << "\n";
    }
    return csv.str();
  }
  const Problem2D p = problem_2d(problem);
  const Field2D f = reference_solution(p, 129, 65);
  csv << "x,y,u\n";
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i)
      csv << g17(f.node_x(i)) << "," << g17(f.node_y(j)) << ","
          << g17(f.at(i, j)) << "\n";
  return csv.str();
}

}  // namespace hcpinn
