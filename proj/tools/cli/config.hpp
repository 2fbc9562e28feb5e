#ifndef HBS_TOOLS_CONFIG_HPP_
#define HBS_TOOLS_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hbs/diagnostics.hpp"
#include "hbs/engine.hpp"
#include "hbs/models/fhmm.hpp"
#include "hbs/models/regression.hpp"
#include "hbs/models/simulate.hpp"
#include "hbs/models/tumor.hpp"

namespace hbs::cli {

struct ModelSection {
  std::string name = "regression";  // regression | tumor | fhmm | flat
  int clones = 3;
  double error_rate = 0.001;
  double alpha = 1.0;
  double f_alpha = 1.0;
  double f_beta = 1.0;
  double proposal_scale = -1.0;  // negative: model default
  double g = -1.0;
  double a_sigma = 0.1;
  double b_sigma = 0.1;
  double a_pi = 0.001;
  double b_pi = 1.0;
  double a0 = 0.1;
  double b0 = 0.1;
  double sigma2 = 1.0;
  int rows = 3;
  int cols = 1;
  int alphabet = 2;
  bool operator==(const ModelSection&) const = default;
};

struct SamplerSection {
  std::string scheme = "hb";
  std::vector<int> m{1};
  int block_size = 1;
  double lambda = 0.0;
  std::string radius_distribution = "fixed";
  std::vector<double> radius_probs;
  long iterations = 1000;
  long burnin = -1;
  long thin = 1;
  std::uint64_t seed = 0;
  std::string theta_update = "conditional";
  std::string axis = "columns";
  bool operator==(const SamplerSection&) const = default;
};

struct IoSection {
  std::string input;
  std::string output = ".";
  std::string init;
  std::string trace;
  std::string compare;
  bool timing = false;
  bool operator==(const IoSection&) const = default;
};

struct GridSection {
  std::string scheme = "hb-block";
  long sweeps = 2000;
  std::uint64_t max_evaluations = 50'000'000;
  long min_sweeps = 200;
  int max_block_size = 0;
  /// Reference states for mode labels: active-index sets joined by ';',
  /// separated by '|'.
  std::string modes;
  bool operator==(const GridSection&) const = default;
};

struct SimulateSection {
  int n = 0;  // 0: experiment default
  int d = 1200;
  int k = 10;
  int l = 1;
  double sigma2 = 0.01;
  double flip = 0.05;
  double initial = 0.5;
  double feature_scale = 1.0;
  double feature_jitter = 0.02;
  long confounder = 10;
  long duplicate = 610;
  double coefficient = 1.0;
  double snr = 5.0;
  int depth = 1000;
  int copies = 1;
  std::string architecture = "linear";
  bool operator==(const SimulateSection&) const = default;
};

struct RunConfig {
  ModelSection model;
  SamplerSection sampler;
  IoSection io;
  GridSection grid;
  SimulateSection simulate;
  bool operator==(const RunConfig&) const = default;
};

/// Sets one dotted key. Unknown keys and malformed values throw ConfigError
/// naming the key.
void set_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_value(const RunConfig& config, const std::string& key);
std::vector<std::string> config_keys();

/// key = value lines; '#' starts a comment.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// Checks value ranges and enum names; throws ConfigError with the key path.
void validate(const RunConfig& config);
SamplerConfig sampler_config(const RunConfig& config);
GridOptions grid_options(const RunConfig& config);
ExperimentParams experiment_params(const RunConfig& config);

}  // namespace hbs::cli

#endif  // HBS_TOOLS_CONFIG_HPP_
