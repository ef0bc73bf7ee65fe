// Command-line front end: run one experiment, sweep a parameter axis,
// verify a saved checkpoint, or dump a reference solution.
//
// Exit codes: 0 success, 1 internal error, 2 bad configuration or missing
// checkpoint, 3 training aborted (artifacts are still written).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hcpinn/experiment.hpp"

namespace {

namespace fs = std::filesystem;

fs::path output_root() {
  const char* env = std::getenv("HCPINN_OUTPUT_ROOT");
  if (env != nullptr && *env != '\0') return fs::path(env);
  return fs::path(".");
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void print_constraints(const hcpinn::ConstraintReport& rep) {
  std::printf("%-28s %12s %12s %8s\n", "condition", "max", "mean", "count");
  for (const auto& c : rep.conditions)
    std::printf("%-28s %12.3e %12.3e %8zu\n", c.name.c_str(), c.max_abs,
                c.mean_abs, c.count);
}

int cmd_run(const std::string& config_path) {
  const auto cfg = hcpinn::load_experiment_config(config_path);
  const auto outcome = hcpinn::run_experiment(cfg);
  const fs::path dir = output_root() / cfg.output;
  hcpinn::write_run_artifacts(outcome, dir);

  std::printf("problem              %s\n", cfg.problem.c_str());
  std::printf("ansatz               %s\n",
              std::string(hcpinn::ansatz_kind_name(cfg.kind)).c_str());
  std::printf("config hash          %s\n", outcome.hash.c_str());
  std::printf("iterations run       %zu\n", outcome.report.iterations_run);
  std::printf("final loss           %.6e\n", outcome.report.final_loss);
  std::printf("final relative L2    %.6e\n", outcome.report.final_metric);
  std::printf("worst constraint     %.3e\n", outcome.constraints.worst());
  std::printf("wall seconds         %.1f\n", outcome.report.wall_seconds);
  std::printf("artifacts            %s\n", dir.string().c_str());
  if (outcome.report.aborted) {
    std::fprintf(stderr, "training aborted: %s\n",
                 outcome.report.abort_reason.c_str());
    return 3;
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values_text) {
  const auto cfg = hcpinn::load_experiment_config(config_path);
  const auto values = split_csv(values_text);
  const auto rows = hcpinn::run_sweep(cfg, axis, values);
  const fs::path dir = output_root() / cfg.output;
  fs::create_directories(dir);
  const fs::path csv = dir / ("sweep_" + axis + ".csv");
  hcpinn::write_text_file(csv,
                          hcpinn::sweep_csv(axis, rows, hcpinn::config_hash(cfg)));

  std::printf("%-10s %10s %4s %16s %12s %8s\n", "axis", "value", "k", "rel_l2",
              "seconds", "seed");
  for (const auto& r : rows)
    std::printf("%-10s %10s %4d %16.6e %12.1f %8llu\n", axis.c_str(),
                r.value.c_str(), r.k_interior, r.final_relative_l2,
                r.wall_seconds, static_cast<unsigned long long>(r.seed));
  std::printf("table written to %s\n", csv.string().c_str());
  return 0;
}

int cmd_verify(const std::string& config_path) {
  const auto cfg = hcpinn::load_experiment_config(config_path);
  const fs::path dir = output_root() / cfg.output;
  const auto result = hcpinn::verify_checkpoint(cfg, dir);
  std::printf("checkpoint hash %s (seed %llu)\n", result.hash.c_str(),
              static_cast<unsigned long long>(result.seed));
  print_constraints(result.constraints);
  hcpinn::write_text_file(
      dir / "verify.csv",
      hcpinn::constraints_csv(result.constraints, result.hash, result.seed));
  return 0;
}

int cmd_oracle(const std::string& problem, const std::string& out_path) {
  hcpinn::write_text_file(fs::path(out_path), hcpinn::oracle_csv(problem));
  std::printf("reference solution for %s written to %s\n", problem.c_str(),
              out_path.c_str());
  return 0;
}

const char* kGrammar = R"(Config file grammar (INI-style, '#' or ';' comments):

  problem = p1 | p2 | p3 | p4
  kind    = window | buffer | soft_phi | soft_multinet
  mode    = interface_only | full_hard        (2D window only)
  output  = <run directory, created under the output root>

  [layout]   beta, k_interior, k_dirichlet, k_neumann   (window orders)
             normal_extent                               (2D window)
             r0, edge_samples, interface_samples         (2D buffer)
  [net]      hidden = 12 12      activation = tanh | sigmoid | swish
             init = glorot | glorot_scaled | normal      init_param = <scale>
  [collocation]
             count (1D)          nx, ny (2D)
             boundary, interface (2D sample counts)
  [train]    iterations, learning_rate, beta1, beta2, epsilon,
             seed, eval_cadence
  [weights]  dbc, nbc, itf_value, itf_flux
             (soft penalty weights; only valid for ansatz kinds that keep
              the corresponding condition soft)

The output root defaults to the working directory and can be moved with
the HCPINN_OUTPUT_ROOT environment variable.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Hard-constrained physics-informed networks for elliptic interface "
      "problems"};
  app.footer(kGrammar);
  app.require_subcommand(1);

  std::string config_path, axis, values_text, problem, out_path;

  auto* run = app.add_subcommand("run", "Train one experiment and write its "
                                        "artifacts (report, CSVs, SVG plots)");
  run->add_option("config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand(
      "sweep", "Run the base config once per axis value; write a summary CSV");
  sweep->add_option("config", config_path, "base experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis,
                    "sweep axis: window_k | beta | init_scheme | seed")
      ->required();
  sweep->add_option("--values", values_text, "comma-separated axis values")
      ->required();

  auto* verify = app.add_subcommand(
      "verify",
      "Re-evaluate boundary/interface residuals for a saved checkpoint");
  verify->add_option("config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* oracle = app.add_subcommand(
      "oracle", "Write the reference solution for a problem as CSV");
  oracle->add_option("problem", problem, "problem id: p1 | p2 | p3 | p4")
      ->required();
  oracle->add_option("--out", out_path, "destination CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (sweep->parsed()) return cmd_sweep(config_path, axis, values_text);
    if (verify->parsed()) return cmd_verify(config_path);
    if (oracle->parsed()) return cmd_oracle(problem, out_path);
  } catch (const hcpinn::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
