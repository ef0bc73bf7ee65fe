#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hcpinn/errors.hpp"
#include "hcpinn/mlp.hpp"
#include "hcpinn/train.hpp"

// Experiment configuration. The file format is a small INI dialect:
//
//   # comment (';' works too), blank lines ignored
//   key = value          before any header: top-level keys
//   [section]
//   key = value          keys inside the section
//
// Values are single tokens or space-separated lists; strings are unquoted.
// Unknown sections or keys are errors that name the offender and its line,
// so typos fail loudly instead of silently using a default.

namespace hcpinn {

struct ExperimentConfig {
  std::string problem = "p1";  // p1 | p2 | p3 | p4
  AnsatzKind kind = AnsatzKind::Window;
  std::string mode = "interface_only";  // 2D window: interface_only|full_hard
  std::string output = "run";           // directory under the output root

  // layout
  double beta = 2.0;
  int k_interior = 1;
  int k_dirichlet = 1;
  int k_neumann = 1;
  double normal_extent = 1.2;  // interface-only window reach
  double r0 = 1.0 / 9.0;       // 2D buffer corner radius
  int edge_samples = 8;        // 2D buffer GL points per segment
  int interface_samples = 8;   // 2D buffer GL points on the interface

  // net
  std::vector<int> hidden = {12, 12};
  Activation activation = Activation::Tanh;
  InitScheme init;

  // collocation
  std::size_t collocation = 40;          // 1D interior count
  std::size_t collocation_x = 40;        // 2D interior grid
  std::size_t collocation_y = 20;
  std::size_t boundary_collocation = 32;   // 2D per-segment samples
  std::size_t interface_collocation = 32;  // 2D interface samples

  TrainConfig train;

  bool operator==(const ExperimentConfig&) const = default;
};

inline std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Swish: return "swish";
  }
  throw ConfigError("unknown activation");
}

inline std::string_view init_kind_name(InitScheme::Kind k) {
  switch (k) {
    case InitScheme::Kind::Glorot: return "glorot";
    case InitScheme::Kind::GlorotScaled: return "glorot_scaled";
    case InitScheme::Kind::Normal: return "normal";
  }
  throw ConfigError("unknown init scheme");
}

namespace detail {

struct ConfigEntry {
  std::string value;
  int line = 0;
  bool used = false;
};

// section -> key -> entry; top-level keys live under the empty section name.
using ConfigTable = std::map<std::string, std::map<std::string, ConfigEntry>>;

inline std::string strip(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline ConfigTable parse_table(std::string_view text) {
  ConfigTable table;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::size_t hash = raw.find_first_of("#;");
    if (hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = strip(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unterminated section header");
      section = strip(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(line_no) +
                          ": empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = strip(std::string_view(line).substr(0, eq));
    const std::string value = strip(std::string_view(line).substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    auto [it, fresh] =
        table[section].insert({key, ConfigEntry{value, line_no, false}});
    if (!fresh)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" +
                        key + "'" +
                        (section.empty() ? "" : " in [" + section + "]"));
  }
  return table;
}

class ConfigReader {
 public:
  explicit ConfigReader(ConfigTable table) : table_(std::move(table)) {}

  std::optional<std::string> take(const std::string& section,
                                  const std::string& key) {
    auto s = table_.find(section);
    if (s == table_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    k->second.used = true;
    return k->second.value;
  }

  double take_number(const std::string& section, const std::string& key,
                     double fallback) {
    const auto v = take(section, key);
    if (!v) return fallback;
    return parse_number(section, key, *v);
  }

  std::uint64_t take_index(const std::string& section, const std::string& key,
                           std::uint64_t fallback) {
    const double d = take_number(section, key, static_cast<double>(fallback));
    if (d < 0.0 || d != static_cast<double>(static_cast<std::uint64_t>(d)))
      throw ConfigError(where(section, key) + " must be a non-negative integer");
    return static_cast<std::uint64_t>(d);
  }

  std::string take_word(const std::string& section, const std::string& key,
                        std::string fallback) {
    return take(section, key).value_or(std::move(fallback));
  }

  std::vector<int> take_ints(const std::string& section, const std::string& key,
                             std::vector<int> fallback) {
    const auto v = take(section, key);
    if (!v) return fallback;
    std::vector<int> out;
    std::istringstream in(*v);
    std::string tok;
    while (in >> tok) {
      const double d = parse_number(section, key, tok);
      if (d != static_cast<double>(static_cast<int>(d)))
        throw ConfigError(where(section, key) + " must list integers");
      out.push_back(static_cast<int>(d));
    }
    if (out.empty())
      throw ConfigError(where(section, key) + " must not be empty");
    return out;
  }

  std::optional<double> take_optional(const std::string& section,
                                      const std::string& key) {
    const auto v = take(section, key);
    if (!v) return std::nullopt;
    return parse_number(section, key, *v);
  }

  // Anything not consumed by the typed getters is a config mistake.
  void reject_unused() const {
    for (const auto& [section, keys] : table_)
      for (const auto& [key, entry] : keys)
        if (!entry.used)
          throw ConfigError(
              "line " + std::to_string(entry.line) + ": unknown key '" + key +
              "'" + (section.empty() ? "" : " in [" + section + "]"));
  }

 private:
  double parse_number(const std::string& section, const std::string& key,
                      const std::string& text) const {
    try {
      std::size_t used = 0;
      const double d = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(where(section, key) + ": '" + text +
                        "' is not a number");
    }
  }

  std::string where(const std::string& section, const std::string& key) const {
    std::string out = "key '" + key + "'";
    if (!section.empty()) out += " in [" + section + "]";
    auto s = table_.find(section);
    if (s != table_.end()) {
      auto k = s->second.find(key);
      if (k != s->second.end())
        out += " (line " + std::to_string(k->second.line) + ")";
    }
    return out;
  }

  ConfigTable table_;
};

}  // namespace detail

inline ExperimentConfig parse_experiment_config(std::string_view text) {
  detail::ConfigReader r(detail::parse_table(text));
  ExperimentConfig c;

  c.problem = r.take_word("", "problem", c.problem);
  if (c.problem != "p1" && c.problem != "p2" && c.problem != "p3" &&
      c.problem != "p4")
    throw ConfigError("key 'problem': unknown problem id '" + c.problem + "'");
  c.kind = ansatz_kind_from(r.take_word("", "kind", "window"));
  c.mode = r.take_word("", "mode", c.mode);
  if (c.mode != "interface_only" && c.mode != "full_hard")
    throw ConfigError("key 'mode': expected interface_only or full_hard, got '" +
                      c.mode + "'");
  c.output = r.take_word("", "output", c.output);

  c.beta = r.take_number("layout", "beta", c.beta);
  c.k_interior = static_cast<int>(r.take_index("layout", "k_interior", 1));
  c.k_dirichlet = static_cast<int>(r.take_index("layout", "k_dirichlet", 1));
  c.k_neumann = static_cast<int>(r.take_index("layout", "k_neumann", 1));
  c.normal_extent = r.take_number("layout", "normal_extent", c.normal_extent);
  c.r0 = r.take_number("layout", "r0", c.r0);
  c.edge_samples = static_cast<int>(r.take_index("layout", "edge_samples", 8));
  c.interface_samples =
      static_cast<int>(r.take_index("layout", "interface_samples", 8));

  c.hidden = r.take_ints("net", "hidden", c.hidden);
  c.activation = parse_activation(r.take_word("net", "activation", "tanh"));
  c.init = parse_init(r.take_word("net", "init", "glorot_scaled"),
                      r.take_number("net", "init_param", 0.5));

  c.collocation = r.take_index("collocation", "count", c.collocation);
  c.collocation_x = r.take_index("collocation", "nx", c.collocation_x);
  c.collocation_y = r.take_index("collocation", "ny", c.collocation_y);
  c.boundary_collocation =
      r.take_index("collocation", "boundary", c.boundary_collocation);
  c.interface_collocation =
      r.take_index("collocation", "interface", c.interface_collocation);

  c.train.kind = c.kind;
  c.train.iterations = r.take_index("train", "iterations", c.train.iterations);
  c.train.learning_rate =
      r.take_number("train", "learning_rate", c.train.learning_rate);
  c.train.beta1 = r.take_number("train", "beta1", c.train.beta1);
  c.train.beta2 = r.take_number("train", "beta2", c.train.beta2);
  c.train.epsilon = r.take_number("train", "epsilon", c.train.epsilon);
  c.train.seed = r.take_index("train", "seed", c.train.seed);
  c.train.eval_cadence =
      r.take_index("train", "eval_cadence", c.train.eval_cadence);

  c.train.weights.dbc = r.take_optional("weights", "dbc");
  c.train.weights.nbc = r.take_optional("weights", "nbc");
  c.train.weights.itf_value = r.take_optional("weights", "itf_value");
  c.train.weights.itf_flux = r.take_optional("weights", "itf_flux");

  r.reject_unused();
  c.train.validate();
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

// Canonical text form: every field explicit, fixed order. Reparsing it
// yields an equal config, and the config hash is computed over it.
inline std::string serialize_experiment_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "problem = " << c.problem << "\n";
  out << "kind = " << ansatz_kind_name(c.kind) << "\n";
  out << "mode = " << c.mode << "\n";
  out << "output = " << c.output << "\n\n";
  out << "[layout]\n";
  out << "beta = " << c.beta << "\n";
  out << "k_interior = " << c.k_interior << "\n";
  out << "k_dirichlet = " << c.k_dirichlet << "\n";
  out << "k_neumann = " << c.k_neumann << "\n";
  out << "normal_extent = " << c.normal_extent << "\n";
  out << "r0 = " << c.r0 << "\n";
  out << "edge_samples = " << c.edge_samples << "\n";
  out << "interface_samples = " << c.interface_samples << "\n\n";
  out << "[net]\n";
  out << "hidden =";
  for (int w : c.hidden) out << " " << w;
  out << "\n";
  out << "activation = " << activation_name(c.activation) << "\n";
  out << "init = " << init_kind_name(c.init.kind) << "\n";
  out << "init_param = " << c.init.param << "\n\n";
  out << "[collocation]\n";
  out << "count = " << c.collocation << "\n";
  out << "nx = " << c.collocation_x << "\n";
  out << "ny = " << c.collocation_y << "\n";
  out << "boundary = " << c.boundary_collocation << "\n";
  out << "interface = " << c.interface_collocation << "\n\n";
  out << "[train]\n";
  out << "iterations = " << c.train.iterations << "\n";
  out << "learning_rate = " << c.train.learning_rate << "\n";
  out << "beta1 = " << c.train.beta1 << "\n";
  out << "beta2 = " << c.train.beta2 << "\n";
  out << "epsilon = " << c.train.epsilon << "\n";
  out << "seed = " << c.train.seed << "\n";
  out << "eval_cadence = " << c.train.eval_cadence << "\n";
  const auto& w = c.train.weights;
  if (w.any()) {
    out << "\n[weights]\n";
    if (w.dbc) out << "dbc = " << *w.dbc << "\n";
    if (w.nbc) out << "nbc = " << *w.nbc << "\n";
    if (w.itf_value) out << "itf_value = " << *w.itf_value << "\n";
    if (w.itf_flux) out << "itf_flux = " << *w.itf_flux << "\n";
  }
  return out.str();
}

// FNV-1a over the canonical serialization, as a fixed-width hex tag for
// artifact provenance.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string text = serialize_experiment_config(c);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace hcpinn
