#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hcpinn/experiment.hpp"

using namespace hcpinn;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* tag) {
  const auto dir = fs::temp_directory_path() /
                   (std::string("hcpinn_test_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TrainReport tiny_report() {
  TrainReport r;
  r.kind = AnsatzKind::Window;
  r.iterations = 100;
  r.seed = 9;
  r.eval_cadence = 50;
  r.learning_rate = 0.01;
  r.history_iters = {0, 50, 100};
  r.loss_history = {1.0, 0.5, 0.25};
  r.metric_history = {0.9, 0.8, 0.7};
  r.iterations_run = 100;
  r.final_loss = 0.25;
  r.final_metric = 0.7;
  r.wall_seconds = 1.5;
  return r;
}

// Small 1D configs so the training smoke tests stay fast.
ExperimentConfig tiny_config(AnsatzKind kind, std::size_t iters = 20) {
  ExperimentConfig c;
  c.problem = "p1";
  c.kind = kind;
  c.hidden = {4};
  c.collocation = 12;
  c.train.kind = kind;
  c.train.iterations = iters;
  c.train.eval_cadence = 10;
  c.train.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("report json carries the run summary") {
  const ExperimentConfig cfg;
  const auto j = train_report_json(cfg, tiny_report(), "deadbeef00000000");

  CHECK(j.at("config_hash") == "deadbeef00000000");
  CHECK(j.at("seed") == 9);
  CHECK(j.at("config").at("problem") == "p1");
  CHECK(j.at("config").at("kind") == "window");
  CHECK(j.at("config").at("iterations") == 100);
  CHECK(j.at("config").at("text").get<std::string>().find("problem = p1") !=
        std::string::npos);
  CHECK(j.at("history").at("iteration").size() == 3);
  CHECK(j.at("history").at("loss")[1] == 0.5);
  CHECK(j.at("history").at("relative_l2")[2] == 0.7);
  CHECK(j.at("iterations_run") == 100);
  CHECK(j.at("final_loss") == 0.25);
  CHECK(j.at("final_relative_l2") == 0.7);
  CHECK(j.at("aborted") == false);
}

TEST_CASE("history csv is byte-stable") {
  const auto text = history_csv(tiny_report(), "00000000deadbeef");
  CHECK(text ==
        "# config_hash = 00000000deadbeef\n"
        "# seed = 9\n"
        "iteration,loss,relative_l2\n"
        "0,1,0.90000000000000002\n"
        "50,0.5,0.80000000000000004\n"
        "100,0.25,0.69999999999999996\n");
  CHECK(history_csv(tiny_report(), "00000000deadbeef") == text);
}

TEST_CASE("checkpoints round-trip and fail loudly") {
  const auto dir = scratch_dir("ckpt");
  const Checkpoint ck{"0123456789abcdef", 42, "p2", "buffer",
                      {1.0, -2.5, 0.125}};
  write_checkpoint(dir / "checkpoint.json", ck);
  const auto back = load_checkpoint(dir / "checkpoint.json");
  CHECK(back.config_hash == ck.config_hash);
  CHECK(back.seed == ck.seed);
  CHECK(back.problem == ck.problem);
  CHECK(back.kind == ck.kind);
  CHECK(back.theta == ck.theta);

  CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), ConfigError);

  std::ofstream(dir / "broken.json") << "{not json";
  CHECK_THROWS_AS(load_checkpoint(dir / "broken.json"), ConfigError);

  std::ofstream(dir / "partial.json") << "{\"config_hash\": \"x\"}";
  CHECK_THROWS_AS(load_checkpoint(dir / "partial.json"), ConfigError);
}

TEST_CASE("svg writers emit plottable documents") {
  svg::Series a{"first", {0.0, 1.0, 2.0}, {1.0, 4.0, 2.0}};
  svg::Series b{"second", {0.0, 1.0, 2.0}, {1e-6, 1e-3, 1.0}, "#d1495b"};

  SUBCASE("line plot") {
    std::ostringstream out;
    svg::write_line_plot(out, "title text", "x", "u", {a, b});
    const auto text = out.str();
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("</svg>") != std::string::npos);
    CHECK(text.find("polyline") != std::string::npos);
    CHECK(text.find("first") != std::string::npos);
    CHECK(text.find("second") != std::string::npos);
    CHECK(text.find("title text") != std::string::npos);
  }

  SUBCASE("log scale labels") {
    std::ostringstream out;
    svg::write_line_plot(out, "loss", "iteration", "loss", {b}, true);
    CHECK(out.str().find("1e") != std::string::npos);
  }

  SUBCASE("bar chart") {
    std::ostringstream out;
    svg::write_bar_chart(out, "residuals", {"left", "right"}, {1e-12, 3e-4});
    const auto text = out.str();
    CHECK(text.find("rect") != std::string::npos);
    CHECK(text.find("left") != std::string::npos);
    CHECK(text.find("3.00e-04") != std::string::npos);
  }

  SUBCASE("errors") {
    std::ostringstream out;
    CHECK_THROWS_AS(svg::write_line_plot(out, "t", "x", "y", {}), ConfigError);
    CHECK_THROWS_AS(svg::write_bar_chart(out, "t", {"one"}, {1.0, 2.0}),
                    ConfigError);
    CHECK_THROWS_AS(
        svg::write_line_plot("/nonexistent_dir_for_sure/plot.svg", "t", "x",
                             "y", {a}),
        ConfigError);
  }
}

TEST_CASE("window run produces artifacts with hard constraints intact") {
  const auto cfg = tiny_config(AnsatzKind::Window);
  const auto outcome = run_experiment(cfg);

  CHECK(outcome.hash == config_hash(cfg));
  CHECK(outcome.report.iterations_run == 20);
  CHECK(std::isfinite(outcome.report.final_metric));
  CHECK(outcome.profile.size() == 501);

  // Hard constraints hold no matter how little the run trained.
  const auto* lv = outcome.constraints.find("left_dirichlet");
  const auto* iv = outcome.constraints.find("interface_0_value");
  const auto* fl = outcome.constraints.find("interface_0_flux");
  REQUIRE(lv != nullptr);
  REQUIRE(iv != nullptr);
  REQUIRE(fl != nullptr);
  CHECK(lv->max_abs <= 1e-13);
  CHECK(iv->max_abs <= 1e-12);
  CHECK(fl->max_abs <= 1e-11);

  const auto dir = scratch_dir("run_artifacts");
  write_run_artifacts(outcome, dir);
  for (const char* name :
       {"report.json", "history.csv", "profile.csv", "residual.csv",
        "constraints.csv", "checkpoint.json", "solution.svg", "residual.svg",
        "constraints.svg"})
    CHECK(fs::exists(dir / name));

  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(j.at("config_hash") == outcome.hash);
  CHECK(j.at("history").at("iteration").size() ==
        outcome.report.history_iters.size());

  // Every CSV opens with the config hash and seed.
  for (const char* name :
       {"history.csv", "profile.csv", "residual.csv", "constraints.csv"}) {
    const auto text = slurp(dir / name);
    CHECK(text.find("# config_hash = " + outcome.hash) == 0);
    CHECK(text.find("# seed = 5") != std::string::npos);
  }

  SUBCASE("re-running the config reproduces the numbers bitwise") {
    const auto again = run_experiment(cfg);
    CHECK(profile_csv(again) == profile_csv(outcome));
    CHECK(history_csv(again.report, again.hash) ==
          history_csv(outcome.report, outcome.hash));
  }

  SUBCASE("verify accepts the checkpoint and rejects a different config") {
    const auto res = verify_checkpoint(cfg, dir);
    CHECK(res.hash == outcome.hash);
    CHECK(res.constraints.find("interface_0_value")->max_abs <= 1e-12);

    auto other = cfg;
    other.beta = 1.5;
    CHECK_THROWS_WITH_AS(verify_checkpoint(other, dir),
                         doctest::Contains("different configuration"),
                         ConfigError);
    CHECK_THROWS_AS(verify_checkpoint(cfg, dir / "nope"), ConfigError);
  }
}

TEST_CASE("buffer and soft runs cover the remaining 1D branches") {
  SUBCASE("buffer") {
    const auto cfg = tiny_config(AnsatzKind::Buffer, 10);
    const auto outcome = run_experiment(cfg);
    CHECK(outcome.report.iterations_run == 10);
    CHECK(outcome.constraints.find("interface_0_value")->max_abs <= 1e-10);
    CHECK(outcome.constraints.find("left_dirichlet")->max_abs <= 1e-10);
  }
  SUBCASE("soft phi trains and reports soft residuals") {
    auto cfg = tiny_config(AnsatzKind::SoftPhi, 10);
    cfg.train.weights.dbc = 10.0;
    const auto outcome = run_experiment(cfg);
    CHECK(outcome.report.iterations_run == 10);
    // Nothing is enforced exactly here; the report simply measures.
    CHECK(outcome.constraints.find("interface_0_value") != nullptr);
    CHECK(std::isfinite(outcome.constraints.worst()));
  }
  SUBCASE("soft multinet trains") {
    const auto cfg = tiny_config(AnsatzKind::SoftMultinet, 10);
    const auto outcome = run_experiment(cfg);
    CHECK(outcome.report.iterations_run == 10);
    CHECK(std::isfinite(outcome.report.final_metric));
  }
  SUBCASE("hard kinds reject soft weights") {
    auto cfg = tiny_config(AnsatzKind::Window, 5);
    cfg.train.weights.itf_value = 1.0;
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
  }
}

TEST_CASE("fresh-init buffer checkpoint passes verify") {
  // The buffer constraint is enforced by the solve, not by training, so an
  // untrained checkpoint must already satisfy boundary and interface rows.
  const auto cfg = tiny_config(AnsatzKind::Buffer, 0);
  const auto p = problem_1d(cfg.problem);
  const auto model = detail::make_buffer_1d(cfg, p);

  const auto dir = scratch_dir("fresh_buffer");
  write_checkpoint(dir / "checkpoint.json",
                   Checkpoint{config_hash(cfg), cfg.train.seed, cfg.problem,
                              "buffer", model.initial_params()});
  const auto res = verify_checkpoint(cfg, dir);
  CHECK(res.constraints.find("left_dirichlet")->max_abs <= 1e-10);
  CHECK(res.constraints.find("right_dirichlet")->max_abs <= 1e-10);
  CHECK(res.constraints.find("interface_0_value")->max_abs <= 1e-10);
  CHECK(res.constraints.find("interface_0_flux")->max_abs <= 1e-10);
}

TEST_CASE("untrained 2D buffer satisfies its sample constraints") {
  ExperimentConfig cfg;
  cfg.problem = "p4";
  cfg.kind = AnsatzKind::Buffer;
  cfg.train.kind = cfg.kind;
  cfg.hidden = {6};
  const auto p = problem_2d(cfg.problem);
  const auto model = detail::make_buffer_2d(cfg, p);
  const auto rep = evaluate_constraints(cfg, model.initial_params());

  CHECK(rep.find("samples_dirichlet")->max_abs <= 1e-9);
  CHECK(rep.find("samples_neumann")->max_abs <= 1e-9);
  CHECK(rep.find("samples_interface_value")->max_abs <= 1e-9);
  CHECK(rep.find("samples_interface_flux")->max_abs <= 1e-9);
  CHECK(rep.find("samples_interface_value")->count == 8);
  // Between the samples nothing is enforced for a fresh net.
  CHECK(rep.find("segment_1_dirichlet") != nullptr);

  SUBCASE("wrong-size parameter vector is rejected") {
    std::vector<double> theta(3, 0.0);
    CHECK_THROWS_AS(evaluate_constraints(cfg, theta), ConfigError);
  }
}

TEST_CASE("sweep points expand axes the way the tables do") {
  const auto base = tiny_config(AnsatzKind::Window, 5);

  SUBCASE("beta") {
    const auto pts = sweep_points(base, "beta", {"1.0", "1.5", "2.0"});
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].beta == 1.0);
    CHECK(pts[2].beta == 2.0);
  }
  SUBCASE("window_k crosses boundary order with interior order") {
    const auto pts = sweep_points(base, "window_k", {"2"});
    REQUIRE(pts.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(pts[i].k_dirichlet == 2);
      CHECK(pts[i].k_neumann == 2);
      CHECK(pts[i].k_interior == i + 1);
    }
    CHECK(sweep_points(base, "window_k", {"1", "2", "3"}).size() == 9);
  }
  SUBCASE("init and seed") {
    const auto pts = sweep_points(base, "init_scheme", {"glorot", "normal"});
    REQUIRE(pts.size() == 2);
    CHECK(pts[1].init.kind == InitScheme::Kind::Normal);
    const auto seeds = sweep_points(base, "seed", {"3", "4", "5"});
    REQUIRE(seeds.size() == 3);
    CHECK(seeds[0].train.seed == 3);
    CHECK(seeds[2].train.seed == 5);
  }
  SUBCASE("axis and kind mismatches fail") {
    auto buffer_base = tiny_config(AnsatzKind::Buffer, 5);
    CHECK_THROWS_AS(sweep_points(buffer_base, "beta", {"1.0"}), ConfigError);
    CHECK_THROWS_AS(sweep_points(base, "spin", {"1"}), ConfigError);
    CHECK_THROWS_AS(sweep_points(base, "beta", {"fast"}), ConfigError);
    CHECK_THROWS_AS(sweep_points(base, "window_k", {"4"}), ConfigError);
    CHECK_THROWS_AS(sweep_points(base, "seed", {"-1"}), ConfigError);
    CHECK_THROWS_AS(sweep_points(base, "beta", {}), ConfigError);
  }
}

TEST_CASE("seed sweep runs end to end") {
  const auto base = tiny_config(AnsatzKind::Window, 5);
  const auto rows = run_sweep(base, "seed", {"5", "6"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].seed == 5);
  CHECK(rows[1].seed == 6);
  CHECK(std::isfinite(rows[0].final_relative_l2));
  CHECK(rows[0].final_relative_l2 != rows[1].final_relative_l2);

  const auto csv = sweep_csv("seed", rows, config_hash(base));
  CHECK(csv.find("axis,value,k_interior,final_relative_l2,wall_seconds,seed") !=
        std::string::npos);
  CHECK(csv.find("seed,5,") != std::string::npos);
  CHECK(csv.find("seed,6,") != std::string::npos);
}

TEST_CASE("oracle csv lists the 1D reference jets") {
  const auto text = oracle_csv("p1", 11);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# problem = p1");
  std::getline(in, line);
  CHECK(line == "x,u,du,d2u");
  std::size_t rows = 0;
  double first_u = -1.0;
  while (std::getline(in, line)) {
    if (rows == 0) {
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      first_u = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    }
    ++rows;
  }
  CHECK(rows == 11);
  CHECK(std::abs(first_u) <= 1e-12);  // p1 is zero-Dirichlet on the left

  CHECK_THROWS_AS(oracle_csv("p9"), ConfigError);
}
