#include "cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <type_traits>
#include <utility>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "hbs/error.hpp"

namespace hbs::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, text));
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  for (const std::string& item : split(text, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

struct Entry {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

// Member pointers two levels deep: section then field.
template <typename S, typename T>
Entry field(std::string key, S RunConfig::*section, T S::*member) {
  Entry e;
  e.key = key;
  e.get = [section, member](const RunConfig& c) {
    const T& v = c.*section.*member;
    if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<T, bool>) {
      return std::string(v ? "true" : "false");
    } else if constexpr (std::is_same_v<T, std::vector<int>> ||
                         std::is_same_v<T, std::vector<double>>) {
      return fmt::format("{}", fmt::join(v, ","));
    } else {
      return fmt::format("{}", v);
    }
  };
  e.set = [key, section, member](RunConfig& c, const std::string& text) {
    T& v = c.*section.*member;
    if constexpr (std::is_same_v<T, std::string>) {
      v = trim(text);
    } else if constexpr (std::is_same_v<T, bool>) {
      v = parse_bool(key, text);
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      v = parse_list<int>(key, text);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      v = parse_list<double>(key, text);
    } else {
      v = parse_number<T>(key, text);
    }
  };
  return e;
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    using C = RunConfig;
    std::vector<Entry> t;
    t.push_back(field("model.name", &C::model, &ModelSection::name));
    t.push_back(field("model.clones", &C::model, &ModelSection::clones));
    t.push_back(field("model.error_rate", &C::model, &ModelSection::error_rate));
    t.push_back(field("model.alpha", &C::model, &ModelSection::alpha));
    t.push_back(field("model.f_alpha", &C::model, &ModelSection::f_alpha));
    t.push_back(field("model.f_beta", &C::model, &ModelSection::f_beta));
    t.push_back(field("model.proposal_scale", &C::model, &ModelSection::proposal_scale));
    t.push_back(field("model.g", &C::model, &ModelSection::g));
    t.push_back(field("model.a_sigma", &C::model, &ModelSection::a_sigma));
    t.push_back(field("model.b_sigma", &C::model, &ModelSection::b_sigma));
    t.push_back(field("model.a_pi", &C::model, &ModelSection::a_pi));
    t.push_back(field("model.b_pi", &C::model, &ModelSection::b_pi));
    t.push_back(field("model.a0", &C::model, &ModelSection::a0));
    t.push_back(field("model.b0", &C::model, &ModelSection::b0));
    t.push_back(field("model.sigma2", &C::model, &ModelSection::sigma2));
    t.push_back(field("model.rows", &C::model, &ModelSection::rows));
    t.push_back(field("model.cols", &C::model, &ModelSection::cols));
    t.push_back(field("model.alphabet", &C::model, &ModelSection::alphabet));

    t.push_back(field("sampler.scheme", &C::sampler, &SamplerSection::scheme));
    t.push_back(field("sampler.m", &C::sampler, &SamplerSection::m));
    t.push_back(field("sampler.K", &C::sampler, &SamplerSection::block_size));
    t.push_back(field("sampler.lambda", &C::sampler, &SamplerSection::lambda));
    t.push_back(field("sampler.radius_distribution", &C::sampler,
                      &SamplerSection::radius_distribution));
    t.push_back(field("sampler.radius_probs", &C::sampler, &SamplerSection::radius_probs));
    t.push_back(field("sampler.iterations", &C::sampler, &SamplerSection::iterations));
    t.push_back(field("sampler.burnin", &C::sampler, &SamplerSection::burnin));
    t.push_back(field("sampler.thin", &C::sampler, &SamplerSection::thin));
    t.push_back(field("sampler.seed", &C::sampler, &SamplerSection::seed));
    t.push_back(field("sampler.theta_update", &C::sampler, &SamplerSection::theta_update));
    t.push_back(field("sampler.axis", &C::sampler, &SamplerSection::axis));

    t.push_back(field("io.input", &C::io, &IoSection::input));
    t.push_back(field("io.output", &C::io, &IoSection::output));
    t.push_back(field("io.init", &C::io, &IoSection::init));
    t.push_back(field("io.trace", &C::io, &IoSection::trace));
    t.push_back(field("io.compare", &C::io, &IoSection::compare));
    t.push_back(field("io.timing", &C::io, &IoSection::timing));

    t.push_back(field("grid.scheme", &C::grid, &GridSection::scheme));
    t.push_back(field("grid.sweeps", &C::grid, &GridSection::sweeps));
    t.push_back(field("grid.max_evaluations", &C::grid, &GridSection::max_evaluations));
    t.push_back(field("grid.min_sweeps", &C::grid, &GridSection::min_sweeps));
    t.push_back(field("grid.max_block_size", &C::grid, &GridSection::max_block_size));
    t.push_back(field("grid.modes", &C::grid, &GridSection::modes));

    t.push_back(field("simulate.n", &C::simulate, &SimulateSection::n));
    t.push_back(field("simulate.d", &C::simulate, &SimulateSection::d));
    t.push_back(field("simulate.k", &C::simulate, &SimulateSection::k));
    t.push_back(field("simulate.l", &C::simulate, &SimulateSection::l));
    t.push_back(field("simulate.sigma2", &C::simulate, &SimulateSection::sigma2));
    t.push_back(field("simulate.flip", &C::simulate, &SimulateSection::flip));
    t.push_back(field("simulate.initial", &C::simulate, &SimulateSection::initial));
    t.push_back(field("simulate.feature_scale", &C::simulate, &SimulateSection::feature_scale));
    t.push_back(field("simulate.feature_jitter", &C::simulate, &SimulateSection::feature_jitter));
    t.push_back(field("simulate.confounder", &C::simulate, &SimulateSection::confounder));
    t.push_back(field("simulate.duplicate", &C::simulate, &SimulateSection::duplicate));
    t.push_back(field("simulate.coefficient", &C::simulate, &SimulateSection::coefficient));
    t.push_back(field("simulate.snr", &C::simulate, &SimulateSection::snr));
    t.push_back(field("simulate.depth", &C::simulate, &SimulateSection::depth));
    t.push_back(field("simulate.copies", &C::simulate, &SimulateSection::copies));
    t.push_back(field("simulate.architecture", &C::simulate, &SimulateSection::architecture));
    return t;
  }();
  return table;
}

const Entry& find_entry(const std::string& key) {
  for (const Entry& e : entries())
    if (e.key == key) return e;
  throw ConfigError(fmt::format("unknown configuration key '{}'", key));
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", key, what));
}

}  // namespace

void set_value(RunConfig& config, const std::string& key, const std::string& value) {
  find_entry(trim(key)).set(config, value);
}

std::string get_value(const RunConfig& config, const std::string& key) {
  return find_entry(key).get(config);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Entry& e : entries()) out.push_back(e.key);
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}: expected key = value", number));
    }
    set_value(config, line.substr(0, eq), line.substr(eq + 1));
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const Entry& e : entries()) out += fmt::format("{} = {}\n", e.key, e.get(config));
  return out;
}

void validate(const RunConfig& c) {
  const auto& m = c.model;
  require(m.name == "regression" || m.name == "tumor" || m.name == "fhmm" || m.name == "flat",
          "model.name", "expected regression, tumor, fhmm or flat, got '" + m.name + "'");
  require(m.clones >= 1, "model.clones", "must be at least 1");
  require(m.error_rate > 0.0 && m.error_rate < 1.0, "model.error_rate", "must lie in (0, 1)");
  require(m.rows >= 1 && m.cols >= 1, "model.rows", "flat model needs positive dimensions");
  require(m.alphabet >= 2, "model.alphabet", "must be at least 2");
  require(m.sigma2 > 0.0, "model.sigma2", "must be positive");

  const auto& s = c.sampler;
  try {
    parse_scheme(s.scheme);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("sampler.scheme: ") + e.what());
  }
  try {
    parse_radius_distribution(s.radius_distribution);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("sampler.radius_distribution: ") + e.what());
  }
  try {
    parse_theta_update(s.theta_update);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("sampler.theta_update: ") + e.what());
  }
  require(s.axis == "columns" || s.axis == "rows", "sampler.axis", "expected columns or rows");
  require(!s.m.empty(), "sampler.m", "needs at least one radius");
  for (int r : s.m) require(r >= 0, "sampler.m", "radii must be non-negative");
  require(s.block_size >= 1, "sampler.K", "must be at least 1");
  require(s.lambda >= 0.0, "sampler.lambda", "must be non-negative");
  require(s.iterations >= 1, "sampler.iterations", "must be positive");
  require(s.burnin <= s.iterations, "sampler.burnin", "exceeds sampler.iterations");
  require(s.thin >= 1, "sampler.thin", "must be at least 1");
  if (s.radius_distribution == "per-block-categorical") {
    double total = 0.0;
    for (double p : s.radius_probs) {
      require(p >= 0.0, "sampler.radius_probs", "probabilities must be non-negative");
      total += p;
    }
    require(std::abs(total - 1.0) < 1e-9, "sampler.radius_probs", "must sum to 1");
  }

  try {
    parse_scheme(c.grid.scheme);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("grid.scheme: ") + e.what());
  }
  require(c.grid.sweeps >= 1 && c.grid.min_sweeps >= 1, "grid.sweeps", "must be positive");
  require(c.grid.max_block_size >= 0, "grid.max_block_size", "must be non-negative");
  require(c.simulate.architecture == "linear" || c.simulate.architecture == "branched",
          "simulate.architecture", "expected linear or branched");
  require(c.simulate.n >= 0 && c.simulate.d >= 1 && c.simulate.k >= 1 && c.simulate.l >= 1,
          "simulate", "sizes must be positive");
}

SamplerConfig sampler_config(const RunConfig& c) {
  validate(c);
  SamplerConfig out;
  out.scheme = parse_scheme(c.sampler.scheme);
  out.ball.radii = c.sampler.m;
  out.ball.lambda = c.sampler.lambda;
  out.ball.distribution = parse_radius_distribution(c.sampler.radius_distribution);
  out.ball.radius_probs = c.sampler.radius_probs;
  out.block_size = c.sampler.block_size;
  out.axis = c.sampler.axis == "rows" ? BlockAxis::kRows : BlockAxis::kColumns;
  out.iterations = c.sampler.iterations;
  out.burnin = c.sampler.burnin;
  out.thin = c.sampler.thin;
  out.seed = c.sampler.seed;
  out.theta_update = parse_theta_update(c.sampler.theta_update);
  out.record_time = c.io.timing;
  return out;
}

GridOptions grid_options(const RunConfig& c) {
  validate(c);
  GridOptions out;
  out.scheme = parse_scheme(c.grid.scheme);
  out.sweeps = c.grid.sweeps;
  out.max_evaluations = c.grid.max_evaluations;
  out.min_sweeps = c.grid.min_sweeps;
  out.max_block_size = c.grid.max_block_size;
  out.seed = c.sampler.seed;
  return out;
}

ExperimentParams experiment_params(const RunConfig& c) {
  validate(c);
  const SimulateSection& s = c.simulate;
  ExperimentParams p;
  p.tumor.truth = s.architecture == "branched" ? branched_architecture() : linear_architecture();
  p.tumor.depth = s.depth;
  p.tumor.copies = s.copies;
  p.tumor.error_rate = c.model.error_rate;
  if (s.n > 0) p.regression.n = s.n;
  p.regression.d = s.d;
  p.regression.confounder = s.confounder;
  p.regression.duplicate = s.duplicate;
  p.regression.coefficient = s.coefficient;
  p.regression.snr = s.snr;
  if (s.n > 0) p.fhmm.n = s.n;
  p.fhmm.k = s.k;
  p.fhmm.l = s.l;
  p.fhmm.sigma2 = s.sigma2;
  p.fhmm.flip = s.flip;
  p.fhmm.initial = s.initial;
  p.fhmm.feature_scale = s.feature_scale;
  p.fhmm.feature_jitter = s.feature_jitter;
  return p;
}

}  // namespace hbs::cli
