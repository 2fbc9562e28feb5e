#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "hbs/error.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericalExit = 3;

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> direct;  // key, value
  bool print_config = false;
};

// Registers a flag that overrides one config key.
void add_override(CLI::App& app, Flags& flags, const std::string& name, const std::string& key,
                  const std::string& help) {
  app.add_option_function<std::string>(
      name, [&flags, key](const std::string& v) { flags.direct.emplace_back(key, v); }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamming ball sampler for discrete latent states"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "key = value configuration file");
  app.add_option("--set", flags.sets, "override a configuration key (key=value)");
  app.add_flag("--print-config", flags.print_config, "print the resolved configuration");
  add_override(app, flags, "--seed", "sampler.seed", "64-bit seed");
  add_override(app, flags, "--out", "io.output", "output directory");
  add_override(app, flags, "--input", "io.input", "dataset directory");
  add_override(app, flags, "--iters", "sampler.iterations", "iterations");
  add_override(app, flags, "--burnin", "sampler.burnin", "burn-in iterations");
  add_override(app, flags, "--thin", "sampler.thin", "keep every n-th iteration");
  add_override(app, flags, "--scheme", "sampler.scheme", "hb | hb-block | block-gibbs | pure-mh");
  add_override(app, flags, "--m", "sampler.m", "radius or comma-separated per-block radii");
  add_override(app, flags, "--K", "sampler.K", "block size");
  add_override(app, flags, "--lambda", "sampler.lambda", "auxiliary distance weight");
  add_override(app, flags, "--model", "model.name", "regression | tumor | fhmm | flat");
  add_override(app, flags, "--init", "io.init", "initial state file");
  add_override(app, flags, "--trace", "io.trace", "trace file for diag");
  add_override(app, flags, "--compare", "io.compare", "trace compared by oracle");
  add_override(app, flags, "--modes", "grid.modes", "reference states, e.g. 0;5|1;5");

  CLI::App* simulate = app.add_subcommand("simulate", "write a synthetic dataset");
  std::string experiment;
  simulate->add_option("experiment", experiment, "tumor | regression | fhmm")->required();
  add_override(*simulate, flags, "--n", "simulate.n", "observations");
  add_override(*simulate, flags, "--d", "simulate.d", "regression covariates");
  add_override(*simulate, flags, "--k", "simulate.k", "hidden chains");
  add_override(*simulate, flags, "--l", "simulate.l", "observation dimension");
  add_override(*simulate, flags, "--sigma2", "simulate.sigma2", "noise variance");
  add_override(*simulate, flags, "--depth", "simulate.depth", "read depth");
  add_override(*simulate, flags, "--copies", "simulate.copies", "copies of each mutation");
  add_override(*simulate, flags, "--architecture", "simulate.architecture",
               "linear | branched");

  CLI::App* run = app.add_subcommand("run", "run a chain and write trace.csv and summary.txt");
  CLI::App* oracle = app.add_subcommand("oracle", "exact posterior of a tiny model");
  CLI::App* grid = app.add_subcommand("grid", "efficiency grid over radius and block size");
  CLI::App* diag = app.add_subcommand("diag", "autocorrelation diagnostics of a trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    hbs::cli::RunConfig config;
    if (!flags.config.empty()) config = hbs::cli::load_config(flags.config);
    for (const auto& [key, value] : flags.direct) hbs::cli::set_value(config, key, value);
    for (const std::string& s : flags.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw hbs::ConfigError("--set expects key=value, got '" + s + "'");
      hbs::cli::set_value(config, s.substr(0, eq), s.substr(eq + 1));
    }
    hbs::cli::validate(config);
    if (flags.print_config) std::cout << hbs::cli::serialize_config(config);

    if (simulate->parsed()) hbs::cli::cmd_simulate(experiment, config, std::cout);
    if (run->parsed()) hbs::cli::cmd_run(config, std::cout);
    if (oracle->parsed()) hbs::cli::cmd_oracle(config, std::cout);
    if (grid->parsed()) hbs::cli::cmd_grid(config, std::cout);
    if (diag->parsed()) hbs::cli::cmd_diag(config, std::cout);
  } catch (const hbs::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const hbs::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const hbs::ContractError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigExit;
  } catch (const hbs::cli::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalExit;
  }
  return 0;
}
