#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hcpinn/config.hpp"
#include "hcpinn/errors.hpp"
#include "hcpinn/train.hpp"

// Run artifact primitives: the report JSON, history CSV, and parameter
// checkpoints. Every file carries the config hash and seed so results can
// be traced back to the exact configuration that produced them. Numbers in
// CSVs are printed with 17 significant digits, which round-trips doubles,
// so re-running a config reproduces files byte for byte.

namespace hcpinn {

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path,
                            std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file '" + path.string() + "'");
  out << content;
}

inline std::string artifact_preamble(const std::string& hash,
                                     std::uint64_t seed) {
  return "# config_hash = " + hash + "\n# seed = " + std::to_string(seed) +
         "\n";
}

inline nlohmann::json train_report_json(const ExperimentConfig& cfg,
                                        const TrainReport& report,
                                        const std::string& hash) {
  nlohmann::json j;
  j["config_hash"] = hash;
  j["seed"] = report.seed;
  j["config"] = {
      {"problem", cfg.problem},
      {"kind", std::string(ansatz_kind_name(report.kind))},
      {"iterations", report.iterations},
      {"learning_rate", report.learning_rate},
      {"eval_cadence", report.eval_cadence},
      {"text", serialize_experiment_config(cfg)},
  };
  j["history"] = {
      {"iteration", report.history_iters},
      {"loss", report.loss_history},
      {"relative_l2", report.metric_history},
  };
  j["iterations_run"] = report.iterations_run;
  j["final_loss"] = report.final_loss;
  j["final_relative_l2"] = report.final_metric;
  j["wall_seconds"] = report.wall_seconds;
  j["aborted"] = report.aborted;
  j["abort_reason"] = report.abort_reason;
  return j;
}

inline std::string history_csv(const TrainReport& report,
                               const std::string& hash) {
  std::ostringstream out;
  out << artifact_preamble(hash, report.seed);
  out << "iteration,loss,relative_l2\n";
  for (std::size_t i = 0; i < report.history_iters.size(); ++i)
    out << report.history_iters[i] << "," << g17(report.loss_history[i]) << ","
        << g17(report.metric_history[i]) << "\n";
  return out.str();
}

struct Checkpoint {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string problem;
  std::string kind;
  std::vector<double> theta;
};

inline void write_checkpoint(const std::filesystem::path& path,
                             const Checkpoint& ck) {
  nlohmann::json j;
  j["config_hash"] = ck.config_hash;
  j["seed"] = ck.seed;
  j["problem"] = ck.problem;
  j["kind"] = ck.kind;
  j["theta"] = ck.theta;
  write_text_file(path, j.dump(1) + "\n");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("checkpoint '" + path.string() + "' does not exist");
  nlohmann::json j;
  try {
    in >> j;
    Checkpoint ck;
    ck.config_hash = j.at("config_hash").get<std::string>();
    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.problem = j.at("problem").get<std::string>();
    ck.kind = j.at("kind").get<std::string>();
    ck.theta = j.at("theta").get<std::vector<double>>();
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint '" + path.string() +
                      "' is malformed: " + e.what());
  }
}

}  // namespace hcpinn
