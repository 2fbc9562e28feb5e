#include "cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "hbs/diagnostics.hpp"
#include "hbs/error.hpp"
#include "hbs/models/flat.hpp"
#include "hbs/models/simulate.hpp"
#include "hbs/oracle.hpp"

namespace hbs::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw IoError(fmt::format("{}: '{}' is not a number", where, text));
  }
  return v;
}

long to_long(const std::string& text, const std::string& where) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw IoError(fmt::format("{}: '{}' is not an integer", where, text));
  }
  return v;
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 1; i <= n; ++i) out.push_back(fmt::format("{}_{}", prefix, i));
  return out;
}

std::ofstream open_output(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path));
  return out;
}

std::string join_path(const std::string& dir, const std::string& file) {
  return (fs::path(dir.empty() ? "." : dir) / file).string();
}

std::string input_path(const RunConfig& c, const std::string& file) {
  return join_path(c.io.input, file);
}

std::string output_path(const RunConfig& c, const std::string& file) {
  return join_path(c.io.output, file);
}

std::string format_stat(double v) {
  if (std::isinf(v)) return "inf";
  return fmt::format("{}", v);
}

void write_state_rows(const std::string& path, const Eigen::MatrixXi& x) {
  write_csv(path, numbered("x", x.rows()), x.transpose().cast<double>());
}

void write_active(const std::string& path, const std::vector<Eigen::Index>& active) {
  Eigen::MatrixXd v(active.size(), 1);
  for (std::size_t i = 0; i < active.size(); ++i) v(i) = static_cast<double>(active[i]);
  write_csv(path, {"active"}, v);
}

std::string state_summary_header(const ModelTarget& model, const Trace& trace) {
  if (model.cols() == 1 && model.alphabet_size() == 2) return "active";
  if (!trace.records.empty() && trace.records.front().state.size() == 0) return "column_hashes";
  return "state";
}

std::string state_summary(const TraceRecord& r, const std::string& kind) {
  std::string out;
  if (kind == "active") {
    for (std::size_t i = 0; i < r.active.size(); ++i)
      out += (i ? ";" : "") + std::to_string(r.active[i]);
  } else if (kind == "state") {
    for (Eigen::Index i = 0; i < r.state.rows(); ++i)
      for (Eigen::Index j = 0; j < r.state.cols(); ++j)
        out += (i + j ? ";" : "") + std::to_string(r.state(i, j));
  } else {
    for (std::size_t i = 0; i < r.column_hashes.size(); ++i)
      out += fmt::format("{}{:016x}", i ? ";" : "", r.column_hashes[i]);
  }
  return out;
}

// Parsed trace CSV: scalar columns plus the raw state summary strings.
struct TraceFile {
  std::vector<std::string> scalar_names;
  Eigen::MatrixXd scalars;  // records x scalar columns
  std::string summary_kind;
  std::vector<std::string> summaries;
};

TraceFile read_trace(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 3 || t.header[0] != "iter") {
    throw IoError(fmt::format("{}: not a trace file", path));
  }
  TraceFile out;
  const std::string last = t.header.back();
  const bool has_summary = last == "active" || last == "state" || last == "column_hashes";
  const std::size_t scalar_end = has_summary ? t.header.size() - 1 : t.header.size();
  for (std::size_t j = 1; j < scalar_end; ++j)
    if (t.header[j] != "elapsed_ms") out.scalar_names.push_back(t.header[j]);
  out.scalars.resize(static_cast<Eigen::Index>(t.rows.size()),
                     static_cast<Eigen::Index>(out.scalar_names.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Eigen::Index col = 0;
    for (std::size_t j = 1; j < scalar_end; ++j) {
      if (t.header[j] == "elapsed_ms") continue;
      out.scalars(static_cast<Eigen::Index>(i), col++) =
          to_double(t.rows[i][j], fmt::format("{} row {}", path, i + 2));
    }
    if (has_summary) out.summaries.push_back(t.rows[i].back());
  }
  if (has_summary) out.summary_kind = last;
  return out;
}

std::vector<long> parse_index_list(const std::string& text, const std::string& where) {
  std::vector<long> out;
  if (text.empty()) return out;
  for (const std::string& item : split(text, ';')) out.push_back(to_long(item, where));
  return out;
}

// Empirical per-entry symbol frequencies of the states in a trace.
Eigen::MatrixXd trace_marginals(const TraceFile& trace, const ModelTarget& model) {
  const Eigen::Index entries = model.size();
  const int s = model.alphabet_size();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(entries, s);
  if (trace.summary_kind != "active" && trace.summary_kind != "state") {
    throw IoError("trace has no per-entry state summary to compare");
  }
  for (const std::string& text : trace.summaries) {
    const std::vector<long> values = parse_index_list(text, "trace state");
    if (trace.summary_kind == "active") {
      counts.col(0).array() += 1.0;
      for (long i : values) {
        if (i < 0 || i >= entries) throw IoError("trace index outside the model");
        counts(i, 0) -= 1.0;
        counts(i, 1) += 1.0;
      }
    } else {
      if (static_cast<Eigen::Index>(values.size()) != entries) {
        throw IoError("trace state has the wrong size for the model");
      }
      // Row-major symbols to column-major entries.
      for (Eigen::Index r = 0; r < model.rows(); ++r)
        for (Eigen::Index c = 0; c < model.cols(); ++c)
          counts(c * model.rows() + r, values[r * model.cols() + c]) += 1.0;
    }
  }
  return counts / std::max<double>(1.0, static_cast<double>(trace.summaries.size()));
}

void write_table_file(const std::string& path, const ExactTable& table) {
  std::ofstream out = open_output(path);
  write_table_csv(out, table);
}

}  // namespace

Eigen::MatrixXd CsvTable::numeric() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < header.size(); ++j)
      out(i, j) = to_double(rows[i][j], fmt::format("row {} column {}", i + 2, header[j]));
  return out;
}

Eigen::Index CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IoError(fmt::format("missing column '{}'", name));
  return it - header.begin();
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path));
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(fmt::format("{}: missing header", path));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line, ',');
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row = split(line, ',');
    if (row.size() != t.header.size()) {
      throw IoError(fmt::format("{} line {}: expected {} fields, found {}", path, number,
                                t.header.size(), row.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
  std::ofstream out = open_output(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << fmt::format("{}", values(i, j));
    out << '\n';
  }
  if (!out) throw IoError(fmt::format("failed writing '{}'", path));
}

std::unique_ptr<ModelTarget> load_model(const RunConfig& c) {
  validate(c);
  const ModelSection& m = c.model;
  if (m.name == "flat") return std::make_unique<FlatModel>(m.rows, m.cols, m.alphabet);
  if (m.name == "regression") {
    const Eigen::MatrixXd z = read_csv(input_path(c, "design.csv")).numeric();
    const CsvTable response = read_csv(input_path(c, "response.csv"));
    const Eigen::VectorXd y = response.numeric().col(response.column("y"));
    if (y.size() != z.rows()) throw IoError("design and response have different row counts");
    RegressionPrior prior;
    prior.g = m.g;
    prior.a_sigma = m.a_sigma;
    prior.b_sigma = m.b_sigma;
    prior.a_pi = m.a_pi;
    prior.b_pi = m.b_pi;
    return std::make_unique<RegressionModel>(y, z, prior);
  }
  if (m.name == "tumor") {
    const CsvTable t = read_csv(input_path(c, "reads.csv"));
    const Eigen::MatrixXd v = t.numeric();
    TumorData data;
    data.reads = v.col(t.column("reads")).cast<int>();
    data.depth = v.col(t.column("depth")).cast<int>();
    TumorPrior prior;
    prior.error_rate = m.error_rate;
    prior.alpha = m.alpha;
    prior.f_alpha = m.f_alpha;
    prior.f_beta = m.f_beta;
    if (m.proposal_scale > 0.0) prior.proposal_scale = m.proposal_scale;
    return std::make_unique<TumorModel>(data, m.clones, prior);
  }
  const Eigen::MatrixXd y = read_csv(input_path(c, "observations.csv")).numeric();
  FhmmSpec spec;
  spec.features = read_csv(input_path(c, "features.csv")).numeric();
  const CsvTable chains = read_csv(input_path(c, "chains.csv"));
  const Eigen::MatrixXd cv = chains.numeric();
  spec.flip = cv.col(chains.column("flip"));
  spec.initial = cv.col(chains.column("initial"));
  spec.a0 = m.a0;
  spec.b0 = m.b0;
  if (m.proposal_scale > 0.0) spec.proposal_scale = m.proposal_scale;
  return std::make_unique<FhmmModel>(y.transpose(), spec, m.sigma2);
}

State load_state(const std::string& path, const ModelTarget& model) {
  const CsvTable t = read_csv(path);
  State x = State::Zero(model.rows(), model.cols());
  if (t.header.size() == 1 && t.header[0] == "active") {
    if (model.cols() != 1) throw IoError(fmt::format("{}: active sets need a vector model", path));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const long k = to_long(t.rows[i][0], path);
      if (k < 0 || k >= model.rows()) throw IoError(fmt::format("{}: index {} out of range", path, k));
      x(k, 0) = 1;
    }
    return x;
  }
  const Eigen::MatrixXd v = t.numeric();
  if (v.rows() != model.cols() || v.cols() != model.rows()) {
    throw IoError(fmt::format("{}: expected {} rows of {} symbols", path, model.cols(), model.rows()));
  }
  x = v.transpose().cast<int>();
  if (x.minCoeff() < 0 || x.maxCoeff() >= model.alphabet_size()) {
    throw IoError(fmt::format("{}: symbols outside the alphabet", path));
  }
  return x;
}

std::vector<State> parse_modes(const std::string& text, Eigen::Index size) {
  std::vector<State> out;
  if (text.empty()) return out;
  for (const std::string& mode : split(text, '|')) {
    State x = State::Zero(size, 1);
    for (const std::string& item : split(mode, ';')) {
      if (item.empty()) continue;
      long k = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), k);
      if (ec != std::errc() || ptr != item.data() + item.size() || k < 0 || k >= size) {
        throw ConfigError(fmt::format("grid.modes: bad index '{}'", item));
      }
      x(k, 0) = 1;
    }
    out.push_back(x);
  }
  return out;
}

void cmd_simulate(const std::string& experiment, const RunConfig& c, std::ostream& log) {
  Rng rng(c.sampler.seed);
  Dataset data;
  try {
    data = simulate_experiment(experiment, experiment_params(c), rng);
  } catch (const ContractError& e) {
    throw ConfigError(fmt::format("simulate: {}", e.what()));
  }
  if (const auto* d = std::get_if<RegressionDataset>(&data)) {
    write_csv(output_path(c, "design.csv"), numbered("z", d->z.cols()), d->z);
    write_csv(output_path(c, "response.csv"), {"y"}, d->y);
    write_active(output_path(c, "truth.csv"), d->active);
    fmt::print(log, "regression: N={} D={} written to {}\n", d->z.rows(), d->z.cols(), c.io.output);
  } else if (const auto* d = std::get_if<TumorDataset>(&data)) {
    Eigen::MatrixXd reads(d->data.reads.size(), 2);
    reads.col(0) = d->data.reads.cast<double>();
    reads.col(1) = d->data.depth.cast<double>();
    write_csv(output_path(c, "reads.csv"), {"reads", "depth"}, reads);
    write_state_rows(output_path(c, "truth_genotypes.csv"), d->x);
    write_csv(output_path(c, "truth_weights.csv"), {"theta"}, d->theta);
    write_csv(output_path(c, "truth_frequencies.csv"), {"phi"}, d->phi);
    fmt::print(log, "tumor: N={} K={} written to {}\n", d->x.cols(), d->x.rows(), c.io.output);
  } else {
    const auto& f = std::get<FhmmDataset>(data);
    write_csv(output_path(c, "observations.csv"), numbered("y", f.y.rows()), f.y.transpose());
    write_csv(output_path(c, "features.csv"), numbered("w", f.spec.features.cols()),
              f.spec.features);
    Eigen::MatrixXd chains(f.spec.flip.size(), 2);
    chains.col(0) = f.spec.flip;
    chains.col(1) = f.spec.initial;
    write_csv(output_path(c, "chains.csv"), {"flip", "initial"}, chains);
    write_state_rows(output_path(c, "truth_states.csv"), f.x);
    write_csv(output_path(c, "truth_sigma2.csv"), {"sigma2"}, Eigen::VectorXd::Constant(1, f.sigma2));
    fmt::print(log, "fhmm: N={} K={} written to {}\n", f.y.cols(), f.x.rows(), c.io.output);
  }
}

void cmd_run(const RunConfig& c, std::ostream& log) {
  const SamplerConfig sc = sampler_config(c);
  std::unique_ptr<ModelTarget> model = load_model(c);
  std::optional<State> init;
  if (!c.io.init.empty()) init = load_state(c.io.init, *model);
  Rng rng = Rng::stream(sc.seed, 0);
  const Trace trace = run_chain(sc, *model, rng, init);

  const std::string kind = state_summary_header(*model, trace);
  {
    std::ofstream out = open_output(output_path(c, "trace.csv"));
    out << "iter,log_joint,elapsed_ms";
    for (std::size_t j = 1; j <= trace.parameter_names.size(); ++j) out << ",theta_" << j;
    out << ',' << kind << '\n';
    for (const TraceRecord& r : trace.records) {
      out << fmt::format("{},{},{}", r.iteration, r.log_joint, r.elapsed_ms);
      for (Eigen::Index j = 0; j < r.theta.size(); ++j) out << fmt::format(",{}", r.theta(j));
      out << ',' << state_summary(r, kind) << '\n';
    }
    if (!out) throw IoError("failed writing the trace");
  }

  const Counters& k = trace.counters;
  std::ofstream out = open_output(output_path(c, "summary.txt"));
  out << fmt::format("scheme = {}\n", c.sampler.scheme);
  out << fmt::format("model = {}\n", c.model.name);
  out << fmt::format("iterations = {}\n", c.sampler.iterations);
  out << fmt::format("recorded = {}\n", trace.records.size());
  out << fmt::format("sweeps = {}\n", k.sweeps);
  out << fmt::format("candidate_evaluations = {}\n", k.candidate_evaluations);
  out << fmt::format("candidate_evaluations_per_sweep = {}\n",
                     k.sweeps ? static_cast<double>(k.candidate_evaluations) / k.sweeps : 0.0);
  if (k.state_proposals > 0) {
    out << fmt::format("state_acceptance_rate = {}\n",
                       static_cast<double>(k.state_accepts) / k.state_proposals);
  }
  if (k.theta_proposals > 0) {
    out << fmt::format("theta_acceptance_rate = {}\n",
                       static_cast<double>(k.theta_accepts) / k.theta_proposals);
  }
  out << fmt::format("move_bound_violations = {}\n", k.move_bound_violations);
  out << fmt::format("max_move = {}\n", k.max_move);
  std::vector<std::pair<std::string, Eigen::VectorXd>> series;
  Eigen::VectorXd lj(trace.records.size());
  for (std::size_t i = 0; i < trace.records.size(); ++i) lj(i) = trace.records[i].log_joint;
  series.emplace_back("log_joint", lj);
  for (std::size_t j = 0; j < trace.parameter_names.size(); ++j) {
    Eigen::VectorXd v(trace.records.size());
    for (std::size_t i = 0; i < trace.records.size(); ++i) v(i) = trace.records[i].theta(j);
    series.emplace_back(fmt::format("theta_{}", j + 1), v);
  }
  for (const auto& [name, v] : series) {
    if (v.size() < 10) continue;
    const IatEstimate est = iat(v);
    out << fmt::format("iat.{} = {}\n", name, format_stat(est.value));
    out << fmt::format("ess.{} = {}\n", name, format_stat(ess(v)));
  }
  fmt::print(log, "{} iterations, {} recorded, {} candidate evaluations\n", c.sampler.iterations,
             trace.records.size(), k.candidate_evaluations);
}

void cmd_oracle(const RunConfig& c, std::ostream& log) {
  std::unique_ptr<ModelTarget> model = load_model(c);
  ExactTable table(1, 1, 2);
  try {
    table = exact_posterior(*model);
  } catch (const ContractError& e) {
    throw ConfigError(fmt::format("oracle: {}", e.what()));
  }
  write_table_file(output_path(c, "exact.csv"), table);
  const Eigen::MatrixXd marginals = exact_marginals(table);
  write_csv(output_path(c, "marginals.csv"), numbered("p", marginals.cols()), marginals);
  fmt::print(log, "states = {}\nlog_normalizer = {}\n", table.size(), table.log_normalizer());
  if (model->alphabet_size() == 2) {
    std::string line;
    for (Eigen::Index i = 0; i < marginals.rows(); ++i)
      line += fmt::format("{}{:.6f}", i ? "," : "", marginals(i, 1));
    fmt::print(log, "marginals = {}\n", line);
  }
  if (!c.io.compare.empty()) {
    const Eigen::MatrixXd empirical = trace_marginals(read_trace(c.io.compare), *model);
    const double deviation = (empirical - marginals).cwiseAbs().maxCoeff();
    std::ofstream out = open_output(output_path(c, "oracle_report.txt"));
    out << fmt::format("max_abs_deviation = {}\n", deviation);
    fmt::print(log, "max_abs_deviation = {}\n", deviation);
  }
}

void cmd_grid(const RunConfig& c, std::ostream& log) {
  const GridOptions options = grid_options(c);
  std::unique_ptr<ModelTarget> model = load_model(c);
  if (model->cols() != 1) throw ConfigError("grid: needs a vector-valued model");
  const std::vector<State> modes = parse_modes(c.grid.modes, model->rows());
  if (modes.empty()) throw ConfigError("grid.modes: at least one reference state is required");
  const State init = c.io.init.empty() ? modes.front() : load_state(c.io.init, *model);
  const std::vector<GridCell> cells =
      efficiency_grid(*model, init, nearest_mode_classifier(modes), options);
  Eigen::MatrixXd table(static_cast<Eigen::Index>(cells.size()), 5);
  std::size_t best = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    table.row(i) << cells[i].radius, cells[i].block_size, cells[i].complexity, cells[i].efficiency,
        cells[i].overall;
    if (cells[i].overall > cells[best].overall) best = i;
  }
  write_csv(output_path(c, "grid.csv"), {"m", "K", "complexity", "efficiency", "overall"}, table);
  if (!cells.empty()) {
    fmt::print(log, "{} cells; best overall efficiency at m={} K={}\n", cells.size(),
               cells[best].radius, cells[best].block_size);
  }
}

void cmd_diag(const RunConfig& c, std::ostream& log) {
  validate(c);
  const std::string path = c.io.trace.empty() ? output_path(c, "trace.csv") : c.io.trace;
  const TraceFile trace = read_trace(path);
  const Eigen::Index n = trace.scalars.rows();
  {
    std::ofstream out = open_output(output_path(c, "diag.csv"));
    out << "column,mean,iat,ess\n";
    for (std::size_t j = 0; j < trace.scalar_names.size(); ++j) {
      const Eigen::VectorXd v = trace.scalars.col(static_cast<Eigen::Index>(j));
      if (n < 10) {
        out << fmt::format("{},{},nan,nan\n", trace.scalar_names[j], n ? v.mean() : 0.0);
        continue;
      }
      out << fmt::format("{},{},{},{}\n", trace.scalar_names[j], v.mean(),
                         format_stat(iat(v).value), format_stat(ess(v)));
    }
  }
  if (trace.summary_kind == "active") {
    long size = 0;
    std::vector<std::vector<long>> sets;
    for (const std::string& s : trace.summaries) {
      sets.push_back(parse_index_list(s, path));
      for (long k : sets.back()) size = std::max(size, k + 1);
    }
    Eigen::MatrixXd incl(size, 2);
    for (long k = 0; k < size; ++k) incl(k, 0) = static_cast<double>(k);
    incl.col(1).setZero();
    for (const auto& set : sets)
      for (long k : set) incl(k, 1) += 1.0;
    if (!sets.empty()) incl.col(1) /= static_cast<double>(sets.size());
    write_csv(output_path(c, "inclusion.csv"), {"entry", "probability"}, incl);
    if (!c.grid.modes.empty()) {
      long mode_size = std::max<long>(size, 1);
      for (const std::string& mode : split(c.grid.modes, '|'))
        for (long k : parse_index_list(mode, "grid.modes")) mode_size = std::max(mode_size, k + 1);
      const std::vector<State> modes = parse_modes(c.grid.modes, mode_size);
      const ModeClassifier classify = nearest_mode_classifier(modes);
      std::vector<int> labels;
      int previous = -1;
      for (const auto& set : sets) {
        State x = State::Zero(static_cast<Eigen::Index>(modes.front().rows()), 1);
        for (long k : set) x(k, 0) = 1;
        previous = classify(x, previous);
        labels.push_back(previous);
      }
      const TransitionCount t = mode_transitions(labels);
      fmt::print(log, "mode_transitions = {}\n", t.count);
    }
  }
  fmt::print(log, "{} records analysed from {}\n", n, path);
}

}  // namespace hbs::cli
