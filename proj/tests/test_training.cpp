#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hcpinn/baselines.hpp"
#include "hcpinn/buffer1d.hpp"
#include "hcpinn/collocation.hpp"
#include "hcpinn/losses.hpp"
#include "hcpinn/problems1d.hpp"
#include "hcpinn/problems2d.hpp"
#include "hcpinn/train.hpp"
#include "hcpinn/window_ansatz1d.hpp"
#include "hcpinn/window_ansatz2d.hpp"

using namespace hcpinn;

namespace {

ad::Jet2<double> const_jet(double c) { return {c, 0.0, 0.0}; }

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-8, std::abs(want));
}

}  // namespace

TEST_CASE("1d collocation sits between the breaks") {
  const auto p = problem1();
  const auto set = collocation_1d(p, 8);
  REQUIRE(set.interior.size() == 8);
  for (std::size_t k = 0; k < 8; ++k)
    CHECK(set.interior[k] == doctest::Approx((k + 0.5) / 8.0).epsilon(1e-15));
  for (double x : set.interior) {
    CHECK(x > 0.0);
    CHECK(x < 1.0);
    CHECK(std::abs(x - 0.5) > 1e-12);
  }
  REQUIRE(set.boundary.size() == 2);
  CHECK(set.boundary[0] == 0.0);
  CHECK(set.boundary[1] == 1.0);
  REQUIRE(set.interface_pts.size() == 1);
  CHECK(set.interface_pts[0] == 0.5);

  // Five points put the middle one exactly on the break; it gets nudged a
  // quarter spacing to the right.
  const auto odd = collocation_1d(p, 5);
  CHECK(odd.interior[2] == doctest::Approx(0.55).epsilon(1e-15));
  for (double x : odd.interior) CHECK(std::abs(x - 0.5) > 1e-12);

  CHECK_THROWS_AS(collocation_1d(p, 0), ConfigError);
}

TEST_CASE("2d collocation avoids the interface line") {
  const auto p = problem4();
  const auto set = collocation_2d(p, 10, 2, 7, 9);
  REQUIRE(set.interior.size() == 20);
  // (0.9, 0.25) lands exactly on the interface and must be nudged.
  bool nudged = false;
  for (const auto& pt : set.interior) {
    CHECK(std::abs(p.signed_normal_distance(pt.x, pt.y)) > 1e-10);
    if (std::abs(pt.x - 0.95) < 1e-12 && std::abs(pt.y - 0.25) < 1e-12)
      nudged = true;
  }
  CHECK(nudged);

  REQUIRE(set.boundary.size() == p.boundary.size());
  for (std::size_t s = 0; s < set.boundary.size(); ++s) {
    REQUIRE(set.boundary[s].size() == 7);
    const auto& seg = p.boundary[s];
    for (std::size_t i = 0; i < 7; ++i) {
      const auto want = seg.at((i + 0.5) / 7.0);
      CHECK(set.boundary[s][i].x == doctest::Approx(want.x).epsilon(1e-15));
      CHECK(set.boundary[s][i].y == doctest::Approx(want.y).epsilon(1e-15));
    }
  }
  REQUIRE(set.interface_pts.size() == 9);
  for (const auto& pt : set.interface_pts) {
    CHECK(std::abs(p.signed_normal_distance(pt.x, pt.y)) < 1e-12);
    const double t = p.arclength_fraction(pt.x, pt.y);
    CHECK(t > 0.0);
    CHECK(t < 1.0);
  }

  CHECK_THROWS_AS(collocation_2d(p, 0, 4), ConfigError);
  CHECK_THROWS_AS(collocation_2d(p, 4, 4, 0), ConfigError);
}

TEST_CASE("1d physics loss matches hand values") {
  auto p = problem1();

  SUBCASE("zero field, zero source") {
    p.source = [](double) { return 0.0; };
    const auto u = [](double) { return const_jet(0.0); };
    const std::vector<double> pts{0.1, 0.3, 0.7};
    CHECK(physics_loss_1d<double>(p, pts, u) == 0.0);
  }

  SUBCASE("single point residual") {
    p.source = [](double) { return 0.0; };
    const auto u = [](double) { return ad::Jet2<double>{0.0, 0.0, -0.7}; };
    const std::vector<double> pts{0.25};  // kappa = 0.1 there
    const double r = -0.7 * -0.1;
    CHECK(physics_loss_1d<double>(p, pts, u) ==
          doctest::Approx(r * r).epsilon(1e-14));
  }

  SUBCASE("the oracle is a root of the residual") {
    const auto set = collocation_1d(p, 40);
    const auto u = [&](double x) { return p.oracle_jet(x, 0); };
    CHECK(physics_loss_1d<double>(p, set.interior, u) < 1e-16);
  }

  SUBCASE("interface points are rejected") {
    const auto u = [](double) { return const_jet(0.0); };
    const std::vector<double> pts{0.5};
    CHECK_THROWS_AS(physics_loss_1d<double>(p, pts, u), CollocationError);
  }
}

TEST_CASE("2d physics loss matches a manufactured field") {
  const auto p = problem4();

  // u = x^2 y: u_xx = 2y, u_yy = 0.
  const auto u = [](double x, double y, int axis) {
    if (axis == 0) return ad::Jet2<double>{x * x * y, 2.0 * x * y, 2.0 * y};
    return ad::Jet2<double>{x * x * y, x * x, 0.0};
  };
  const std::vector<Point2> pts{{0.3, 0.4}, {1.5, 0.8}, {0.7, 0.1}};
  double want = 0.0;
  for (const auto& pt : pts) {
    const double r =
        2.0 * pt.y * -p.kappa_at(pt.x, pt.y) - p.source(pt.x, pt.y);
    want += r * r;
  }
  CHECK(physics_loss_2d<double>(p, pts, u) ==
        doctest::Approx(want).epsilon(1e-15));

  // With u = 0 the loss is just the squared source.
  const auto zero = [](double, double, int) { return const_jet(0.0); };
  const auto set = collocation_2d(p, 6, 4);
  double src = 0.0;
  for (const auto& pt : set.interior) {
    const double f = p.source(pt.x, pt.y);
    src += f * f;
  }
  CHECK(physics_loss_2d<double>(p, set.interior, zero) ==
        doctest::Approx(src).epsilon(1e-15));

  const std::vector<Point2> bad{{0.9, 0.25}};  // exactly on the interface
  CHECK_THROWS_AS(physics_loss_2d<double>(p, bad, zero), CollocationError);
}

TEST_CASE("1d soft losses reproduce the boundary and jump conventions") {
  Problem1D p;
  p.name = "soft";
  p.breaks = {0.0, 0.5, 1.0};
  p.kappa = {2.0, 3.0};
  p.left = {BcType::Dirichlet, 0.0};
  p.right = {BcType::Neumann, 0.0};
  p.source = [](double) { return 0.0; };
  CollocationSet1D set;
  set.boundary = {0.0, 1.0};
  set.interface_pts = {0.5};

  SUBCASE("a constant 0.3 misses a zero Dirichlet value by 0.09") {
    const auto u_on = [](std::size_t, double) { return const_jet(0.3); };
    const auto terms = soft_losses_1d<double>(p, set, u_on);
    CHECK(terms.dbc == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(terms.nbc == 0.0);
    CHECK(terms.itf_value == 0.0);
    CHECK(terms.itf_flux == 0.0);
  }

  SUBCASE("jump residuals are upper minus lower minus the data") {
    p.value_jump = {0.5};
    p.flux_jump = {1.25};
    const auto u_on = [](std::size_t m, double) {
      return m == 0 ? ad::Jet2<double>{1.0, 2.0, 0.0}
                    : ad::Jet2<double>{4.0, 8.0, 0.0};
    };
    const auto terms = soft_losses_1d<double>(p, set, u_on);
    // value: 4 - 1 - 0.5; flux: 3*8 - 2*2 - 1.25; nbc: right slope 8.
    CHECK(terms.dbc == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(terms.nbc == doctest::Approx(64.0).epsilon(1e-15));
    CHECK(terms.itf_value == doctest::Approx(6.25).epsilon(1e-15));
    CHECK(terms.itf_flux == doctest::Approx(351.5625).epsilon(1e-15));
  }

  SUBCASE("malformed boundary list is rejected") {
    set.boundary = {0.0};
    const auto u_on = [](std::size_t, double) { return const_jet(0.0); };
    CHECK_THROWS_AS(soft_losses_1d<double>(p, set, u_on), ConfigError);
  }
}

TEST_CASE("2d soft losses cover segments and the interface") {
  const auto p = problem4();
  const auto set = collocation_2d(p, 4, 4, 3, 3);

  SUBCASE("constant field only misses the Dirichlet data") {
    const auto u_on = [](std::size_t, double, double, Point2) {
      return const_jet(0.25);
    };
    const auto terms = soft_losses_2d<double>(p, set, u_on);
    // Segments 1, 2, 3 are Dirichlet with value 0, three samples each.
    CHECK(terms.dbc == doctest::Approx(9 * 0.0625).epsilon(1e-14));
    CHECK(terms.nbc == 0.0);
    CHECK(terms.itf_value == 0.0);
    CHECK(terms.itf_flux == 0.0);
  }

  SUBCASE("the plane u = x exercises slopes and the flux jump") {
    const auto u_on = [](std::size_t, double x, double, Point2 dir) {
      return ad::Jet2<double>{x, dir.x, 0.0};
    };
    const auto terms = soft_losses_2d<double>(p, set, u_on);
    // Neumann residual kappa_m n.grad u on segments 0 (n = (0,-1)),
    // 4 (n = (0,1)), 5 (n = (-1,0)); only the left edge sees a slope.
    const double left = p.kappa[0] * -1.0;
    CHECK(terms.nbc == doctest::Approx(3 * left * left).epsilon(1e-14));
    CHECK(terms.itf_value == doctest::Approx(0.0).epsilon(1e-20));
    const auto n = p.itf_normal_left();
    const double rf = p.kappa[0] * n.x - p.kappa[1] * n.x;
    CHECK(terms.itf_flux == doctest::Approx(3 * rf * rf).epsilon(1e-14));
    // Dirichlet residuals are x itself along segments 1-3.
    double dbc = 0.0;
    for (std::size_t s : {1u, 2u, 3u})
      for (const auto& pt : set.boundary[s]) dbc += pt.x * pt.x;
    CHECK(terms.dbc == doctest::Approx(dbc).epsilon(1e-14));
  }
}

TEST_CASE("polar physics loss") {
  SUBCASE("harmonic fields with no source are roots") {
    auto p = problem4();
    p.gaussians.clear();
    std::vector<CornerElement2D> corners(1);
    corners[0].center = {0.0, 0.0};
    const auto u = [](double x, double y, Point2 d) {
      return ad::Jet2<double>{x * x - y * y, 2.0 * (x * d.x - y * d.y),
                              2.0 * (d.x * d.x - d.y * d.y)};
    };
    const auto set = collocation_2d(p, 8, 6);
    CHECK(polar_physics_loss<double>(p, set.interior, corners, u) < 1e-20);
  }

  SUBCASE("u = r^2 with a matching constant source is a near-root") {
    auto p = problem4();
    p.kappa = {1.0, 1.0};
    // A huge gaussian is flat over the domain: f is -4 up to ~1e-11.
    p.gaussians = {{{1.0, 0.5}, 1e6, -4.0}};
    std::vector<CornerElement2D> corners(1);
    corners[0].center = {0.0, 0.0};
    const auto u = [](double x, double y, Point2 d) {
      const double v = x * x + y * y;
      return ad::Jet2<double>{v, 2.0 * (x * d.x + y * d.y),
                              2.0 * (d.x * d.x + d.y * d.y)};
    };
    const auto set = collocation_2d(p, 8, 6);
    CHECK(polar_physics_loss<double>(p, set.interior, corners, u) < 1e-15);
  }

  SUBCASE("zero field reduces to the r^2-weighted source") {
    const auto p = problem4();
    const auto layout = full_window_layout(p);
    const auto zero = [](double, double, Point2) { return const_jet(0.0); };
    const auto set = collocation_2d(p, 8, 6);
    double want = 0.0;
    for (const auto& pt : set.interior) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : layout.corners) {
        const double dx = pt.x - c.center.x, dy = pt.y - c.center.y;
        best = std::min(best, dx * dx + dy * dy);
      }
      const double r2f = best * p.source(pt.x, pt.y);
      want += r2f * r2f;
    }
    CHECK(polar_physics_loss<double>(p, set.interior, layout.corners, zero) ==
          doctest::Approx(want).epsilon(1e-13));
  }

  SUBCASE("corner nodes and interface points are rejected") {
    const auto p = problem4();
    std::vector<CornerElement2D> corners(1);
    corners[0].center = {0.0, 0.0};
    const auto zero = [](double, double, Point2) { return const_jet(0.0); };
    const std::vector<Point2> apex{{0.0, 0.0}};
    CHECK_THROWS_AS(polar_physics_loss<double>(p, apex, corners, zero),
                    CollocationError);
    const std::vector<Point2> on_itf{{0.9, 0.25}};
    CHECK_THROWS_AS(polar_physics_loss<double>(p, on_itf, corners, zero),
                    CollocationError);
    CHECK_THROWS_AS(
        polar_physics_loss<double>(p, apex, std::span<const CornerElement2D>{},
                                   zero),
        ConfigError);
  }
}

TEST_CASE("train config validation and soft weight policy") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  TrainConfig bad = cfg;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.eval_cadence = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  CHECK(!cfg.weights.any());
  CHECK_NOTHROW(require_no_soft_weights(cfg, "window ansatz"));
  cfg.weights.dbc = 1.0;
  CHECK(cfg.weights.any());
  CHECK(!cfg.weights.any_interface());
  try {
    require_no_soft_weights(cfg, "window ansatz");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("window ansatz") != std::string::npos);
  }
  // Soft boundaries are fine for a hard-interface model, soft interface not.
  CHECK_NOTHROW(require_no_interface_weights(cfg, "interface-only ansatz"));
  cfg.weights.itf_flux = 2.0;
  CHECK(cfg.weights.any_interface());
  CHECK_THROWS_AS(require_no_interface_weights(cfg, "interface-only ansatz"),
                  ConfigError);

  for (auto k : {AnsatzKind::Window, AnsatzKind::Buffer, AnsatzKind::SoftPhi,
                 AnsatzKind::SoftMultinet})
    CHECK(ansatz_kind_from(ansatz_kind_name(k)) == k);
  CHECK_THROWS_AS(ansatz_kind_from("adaptive"), ConfigError);
}

TEST_CASE("the driver minimizes a quadratic bowl and reports history") {
  const std::vector<double> target{1.5, -0.25, 0.75};
  const auto loss = [&](auto theta) {
    using S = typename std::remove_cvref_t<decltype(theta)>::value_type;
    S out = S(0.0);
    for (std::size_t i = 0; i < target.size(); ++i) {
      const S d = theta[i] - S(target[i]);
      out = out + d * d;
    }
    return out;
  };
  const auto metric = [&](std::span<const double> theta) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double d = theta[i] - target[i];
      d2 += d * d;
    }
    return std::sqrt(d2);
  };

  TrainConfig cfg;
  cfg.kind = AnsatzKind::Buffer;
  cfg.iterations = 500;
  cfg.learning_rate = 0.05;
  cfg.eval_cadence = 100;
  cfg.seed = 7;

  const auto run = train_loop(loss, {0.0, 0.0, 0.0}, cfg, metric);
  const auto& rep = run.report;
  CHECK(!rep.aborted);
  CHECK(rep.kind == AnsatzKind::Buffer);
  CHECK(rep.seed == 7);
  CHECK(rep.iterations_run == 500);
  REQUIRE(rep.history_iters.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(rep.history_iters[i] == 100 * i);
  CHECK(rep.loss_history.front() == doctest::Approx(2.875).epsilon(1e-15));
  CHECK(rep.final_loss < 1e-4);
  CHECK(rep.final_loss < rep.loss_history.front());
  CHECK(rep.final_loss == rep.loss_history.back());
  CHECK(rep.final_metric == rep.metric_history.back());
  CHECK(rep.wall_seconds >= 0.0);
  for (std::size_t i = 0; i < target.size(); ++i)
    CHECK(run.theta[i] == doctest::Approx(target[i]).epsilon(1e-2));

  SUBCASE("bitwise determinism") {
    const auto again = train_loop(loss, {0.0, 0.0, 0.0}, cfg, metric);
    REQUIRE(again.theta.size() == run.theta.size());
    for (std::size_t i = 0; i < run.theta.size(); ++i)
      CHECK(again.theta[i] == run.theta[i]);
    REQUIRE(again.report.loss_history.size() == rep.loss_history.size());
    for (std::size_t i = 0; i < rep.loss_history.size(); ++i)
      CHECK(again.report.loss_history[i] == rep.loss_history[i]);
  }

  SUBCASE("zero iterations echoes the initial state") {
    TrainConfig freeze = cfg;
    freeze.iterations = 0;
    const auto idle = train_loop(loss, {0.5, 0.5, 0.5}, freeze, metric);
    CHECK(idle.report.iterations_run == 0);
    REQUIRE(idle.report.history_iters.size() == 1);
    CHECK(idle.report.history_iters[0] == 0);
    const double first = 1.0 + 0.5625 + 0.0625;  // sum of squared offsets
    CHECK(idle.report.final_loss == doctest::Approx(first).epsilon(1e-15));
    CHECK(idle.theta == std::vector<double>{0.5, 0.5, 0.5});
  }

  SUBCASE("a short run still records its last iterate") {
    TrainConfig brief = cfg;
    brief.iterations = 7;
    const auto r = train_loop(loss, {0.0, 0.0, 0.0}, brief, metric);
    REQUIRE(r.report.history_iters.size() == 2);
    CHECK(r.report.history_iters[0] == 0);
    CHECK(r.report.history_iters[1] == 7);
  }
}

TEST_CASE("the driver aborts on NaN and rolls back") {
  // sqrt walks left and goes negative after the first Adam step.
  const auto loss = [](auto theta) {
    using S = typename std::remove_cvref_t<decltype(theta)>::value_type;
    if constexpr (std::is_same_v<S, ad::Rev>) return ad::sqrt(theta[0]);
    else return std::sqrt(theta[0]);
  };
  const auto metric = [](std::span<const double> theta) { return theta[0]; };

  TrainConfig cfg;
  cfg.iterations = 50;
  cfg.learning_rate = 0.1;
  cfg.eval_cadence = 1;

  const auto run = train_loop(loss, {0.04}, cfg, metric);
  CHECK(run.report.aborted);
  CHECK(run.report.abort_reason.find("NaN") != std::string::npos);
  CHECK(run.theta[0] == 0.04);  // rolled back to the last clean iterate
  CHECK(run.report.iterations_run == 0);
  CHECK(run.report.final_loss == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(run.report.final_metric == 0.04);
  REQUIRE(run.report.history_iters.size() == 1);
  CHECK(run.report.history_iters[0] == 0);

  SUBCASE("NaN at iteration zero leaves honest NaN metrics") {
    const auto dead = train_loop(loss, {-1.0}, cfg, metric);
    CHECK(dead.report.aborted);
    CHECK(dead.report.iterations_run == 0);
    CHECK(dead.theta[0] == -1.0);
    CHECK(std::isnan(dead.report.final_loss));
    CHECK(dead.report.history_iters.empty());
  }
}

TEST_CASE("phi-pinn and multinet baselines") {
  CHECK(subdomain_indicator(0, 2) == -1.0);
  CHECK(subdomain_indicator(1, 2) == 1.0);
  CHECK(subdomain_indicator(0, 1) == 0.0);
  CHECK(subdomain_indicator(1, 3) == 0.0);
  CHECK(subdomain_indicator(2, 3) == 1.0);

  const auto p = problem1();

  SUBCASE("1d phi-pinn uses the indicator channel") {
    PhiPinn1D model(p, Mlp::create({2, 6, 1}, Activation::Tanh, {}, 5));
    const auto theta = model.initial_params();
    CHECK(model.param_count() == theta.size());
    const auto blocks = model.param_blocks();
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].name == "net");
    const std::span<const double> th(theta);

    // eval resolves the subdomain; eval_on can probe the other branch.
    CHECK(model.eval(th, 0.3).v == model.eval_on(0, th, 0.3).v);
    CHECK(model.eval(th, 0.7).v == model.eval_on(1, th, 0.7).v);
    CHECK(std::abs(model.eval_on(0, th, 0.7).v - model.eval_on(1, th, 0.7).v) >
          1e-12);

    const double h = 1e-6;
    const double fd =
        (model.value(th, 0.3 + h) - model.value(th, 0.3 - h)) / (2 * h);
    CHECK(rel_err(model.eval(th, 0.3).d1, fd) < 1e-6);

    CHECK_THROWS_AS(PhiPinn1D(p, Mlp::create({1, 4, 1}, Activation::Tanh, {}, 5)),
                    ConfigError);
    CHECK_THROWS_AS(model.eval_on(2, th, 0.3), ConfigError);
  }

  SUBCASE("1d multinet keeps subdomains independent") {
    std::vector<Mlp> nets;
    nets.push_back(Mlp::create({1, 1}, Activation::Tanh, {}, 1));
    nets.push_back(Mlp::create({1, 1}, Activation::Tanh, {}, 2));
    MultiNet1D model(p, std::move(nets));
    CHECK(model.param_count() == 4);
    const auto blocks = model.param_blocks();
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[1].name == "net_1");
    CHECK(blocks[1].offset == 2);

    // A {1,1} net is w x + b; zero the weights and poke the biases.
    const std::vector<double> theta{0.0, 0.7, 0.0, -0.3};
    const std::span<const double> th(theta);
    CHECK(model.eval_on(0, th, 0.9).v == 0.7);
    CHECK(model.eval_on(1, th, 0.1).v == -0.3);
    CHECK(model.value(th, 0.2) == 0.7);
    CHECK(model.value(th, 0.8) == -0.3);

    std::vector<Mlp> one;
    one.push_back(Mlp::create({1, 1}, Activation::Tanh, {}, 1));
    CHECK_THROWS_AS(MultiNet1D(p, std::move(one)), ConfigError);
    std::vector<Mlp> wide;
    wide.push_back(Mlp::create({2, 1}, Activation::Tanh, {}, 1));
    wide.push_back(Mlp::create({2, 1}, Activation::Tanh, {}, 2));
    CHECK_THROWS_AS(MultiNet1D(p, std::move(wide)), ConfigError);
  }

  SUBCASE("2d baselines seed directional derivatives") {
    const auto q = problem4();
    PhiPinn2D phi(q, Mlp::create({3, 6, 1}, Activation::Tanh, {}, 9));
    const auto theta = phi.initial_params();
    const std::span<const double> th(theta);

    const auto a0 = phi.eval(th, 1.3, 0.4, 0);
    const auto d0 = phi.eval_dir(th, 1.3, 0.4, {1.0, 0.0});
    CHECK(a0.v == d0.v);
    CHECK(a0.d1 == d0.d1);
    CHECK(a0.d2 == d0.d2);

    const Point2 dir{0.6, 0.8};
    const double h = 1e-6;
    const auto g = [&](double t) {
      return phi.value(th, 1.3 + t * dir.x, 0.4 + t * dir.y);
    };
    const auto j = phi.eval_dir(th, 1.3, 0.4, dir);
    CHECK(rel_err(j.d1, (g(h) - g(-h)) / (2 * h)) < 1e-6);

    CHECK_THROWS_AS(PhiPinn2D(q, Mlp::create({2, 4, 1}, Activation::Tanh, {}, 9)),
                    ConfigError);
    CHECK_THROWS_AS(PhiPinn2D::axis_dir(2), ConfigError);

    std::vector<Mlp> nets;
    nets.push_back(Mlp::create({2, 4, 1}, Activation::Tanh, {}, 3));
    nets.push_back(Mlp::create({2, 4, 1}, Activation::Tanh, {}, 4));
    MultiNet2D multi(q, std::move(nets));
    const auto mt = multi.initial_params();
    const std::span<const double> mth(mt);
    const auto m0 = multi.eval(mth, 0.4, 0.6, 1);
    const auto md = multi.eval_dir(mth, 0.4, 0.6, {0.0, 1.0});
    CHECK(m0.v == md.v);
    CHECK(m0.d1 == md.d1);

    std::vector<Mlp> three;
    for (int i = 0; i < 3; ++i)
      three.push_back(Mlp::create({2, 4, 1}, Activation::Tanh, {}, i + 1));
    CHECK_THROWS_AS(MultiNet2D(q, std::move(three)), ConfigError);
  }
}

TEST_CASE("gradients flow through the assembled soft loss") {
  const auto p = problem1();
  const auto set = collocation_1d(p, 6);

  const auto check_model = [&](const auto& model, std::span<const double> theta) {
    const auto build = [&](auto th) {
      using S = typename std::remove_cvref_t<decltype(th)>::value_type;
      const auto u = [&](double x) { return model.template eval<S>(th, x); };
      const auto u_on = [&](std::size_t m, double x) {
        return model.template eval_on<S>(m, th, x);
      };
      S loss = physics_loss_1d<S>(p, set.interior, u);
      const auto soft = soft_losses_1d<S>(p, set, u_on);
      return loss + soft.dbc + soft.nbc + soft.itf_value + soft.itf_flux;
    };
    const auto grad = ad::gradient(build, theta);
    std::vector<double> th(theta.begin(), theta.end());
    for (std::size_t i = 0; i < th.size(); ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(th[i]));
      const double keep = th[i];
      th[i] = keep + h;
      const double up = build(std::span<const double>(th));
      th[i] = keep - h;
      const double dn = build(std::span<const double>(th));
      th[i] = keep;
      const double fd = (up - dn) / (2 * h);
      const double denom = std::max(1e-8, std::max(std::abs(fd), std::abs(grad[i])));
      CHECK(std::abs(grad[i] - fd) / denom < 1e-5);
    }
  };

  SUBCASE("phi-pinn") {
    PhiPinn1D model(p, Mlp::create({2, 3, 1}, Activation::Tanh, {}, 17));
    const auto theta = model.initial_params();
    check_model(model, theta);
  }
  SUBCASE("multinet") {
    std::vector<Mlp> nets;
    nets.push_back(Mlp::create({1, 3, 1}, Activation::Tanh, {}, 21));
    nets.push_back(Mlp::create({1, 3, 1}, Activation::Tanh, {}, 22));
    MultiNet1D model(p, std::move(nets));
    const auto theta = model.initial_params();
    check_model(model, theta);
  }
}

TEST_CASE("mini training runs move real models downhill") {
  const auto p = problem1();
  const auto set = collocation_1d(p, 24);

  SUBCASE("hard window ansatz, physics loss only") {
    std::vector<Mlp> nets;
    nets.push_back(Mlp::create({1, 6, 1}, Activation::Tanh, {}, 3));
    nets.push_back(Mlp::create({1, 6, 1}, Activation::Tanh, {}, 4));
    WindowAnsatz1D ansatz(p, make_window_layout(p), std::move(nets));

    const auto loss = [&](std::span<const ad::Rev> th) {
      const auto u = [&](double x) {
        return ansatz.eval(th, ad::jet_var(ad::Rev(x)));
      };
      return physics_loss_1d<ad::Rev>(p, set.interior, u);
    };
    const auto metric = [&](std::span<const double> th) {
      return relative_l2_1d(p, [&](double x) { return ansatz.value(th, x); },
                            200);
    };

    TrainConfig cfg;
    cfg.kind = AnsatzKind::Window;
    cfg.iterations = 150;
    cfg.learning_rate = 0.02;
    cfg.eval_cadence = 50;
    require_no_soft_weights(cfg, "window ansatz");

    const auto run = train_loop(loss, ansatz.initial_params(), cfg, metric);
    CHECK(!run.report.aborted);
    CHECK(run.report.final_loss < 0.5 * run.report.loss_history.front());
    CHECK(run.report.final_metric < run.report.metric_history.front());
  }

  SUBCASE("buffer ansatz differentiates through its solve") {
    std::vector<Mlp> nets;
    nets.push_back(Mlp::create({1, 5, 1}, Activation::Tanh, {}, 13));
    nets.push_back(Mlp::create({1, 5, 1}, Activation::Tanh, {}, 14));
    BufferAnsatz1D ansatz(p, std::move(nets));

    const auto loss = [&](std::span<const ad::Rev> th) {
      const auto state = ansatz.solve(th);
      const auto u = [&](double x) {
        return ansatz.eval(th, state, ad::jet_var(ad::Rev(x)));
      };
      return physics_loss_1d<ad::Rev>(p, set.interior, u);
    };
    const auto metric = [&](std::span<const double> th) {
      const auto state = ansatz.solve(th);
      return relative_l2_1d(
          p, [&](double x) { return ansatz.value(th, state, x); }, 200);
    };

    TrainConfig cfg;
    cfg.kind = AnsatzKind::Buffer;
    cfg.iterations = 100;
    cfg.learning_rate = 0.05;
    cfg.eval_cadence = 25;

    const auto run = train_loop(loss, ansatz.initial_params(), cfg, metric);
    CHECK(!run.report.aborted);
    CHECK(run.report.final_loss < run.report.loss_history.front());
    CHECK(run.report.iterations_run == 100);
  }
}

TEST_CASE("relative l2 metrics") {
  const auto p = problem1();
  // The oracle itself has zero distance; a constant is order one.
  CHECK(relative_l2_1d(p, [&](double x) { return p.oracle(x, 0); }) < 1e-14);
  const double off = relative_l2_1d(p, [](double) { return 0.0; });
  CHECK(off == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(relative_l2_1d(p, [](double) { return 0.0; }, 0), ConfigError);

  const auto q = problem4();
  Field2D ref;
  ref.nx = 11;
  ref.ny = 6;
  ref.xmin = q.xmin;
  ref.xmax = q.xmax;
  ref.ymin = q.ymin;
  ref.ymax = q.ymax;
  ref.u.assign(ref.nx * ref.ny, 2.0);
  // Exact match and a field off by a constant factor.
  CHECK(relative_l2_2d(q, ref, [](double, double) { return 2.0; }) < 1e-15);
  CHECK(relative_l2_2d(q, ref, [](double, double) { return 1.0; }) ==
        doctest::Approx(0.5).epsilon(1e-12));
}
