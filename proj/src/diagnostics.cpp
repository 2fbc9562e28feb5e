#include "hbs/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "hbs/ball.hpp"
#include "hbs/error.hpp"

namespace hbs {

IatEstimate iat(const Eigen::Ref<const Eigen::VectorXd>& series) {
  const Eigen::Index n = series.size();
  HBS_REQUIRE(n >= 10, "IAT needs at least 10 values");
  const Eigen::ArrayXd centered = series.array() - series.mean();
  auto autocov = [&](Eigen::Index lag) {
    return (centered.head(n - lag) * centered.tail(n - lag)).sum() / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return {std::numeric_limits<double>::infinity(), true};
  double paired_sum = 0.0;
  for (Eigen::Index k = 0; 2 * k + 1 < n; ++k) {
    const double pair = autocov(2 * k) + autocov(2 * k + 1);
    if (!(pair > 0.0)) break;
    paired_sum += pair;
  }
  const double tau = -1.0 + 2.0 * paired_sum / c0;
  return {std::max(1.0, tau), false};
}

double ess(const Eigen::Ref<const Eigen::VectorXd>& series) {
  const IatEstimate t = iat(series);
  if (t.infinite) return 0.0;
  return static_cast<double>(series.size()) / t.value;
}

Eigen::VectorXd running_mean(const Eigen::Ref<const Eigen::VectorXd>& indicator) {
  Eigen::VectorXd out(indicator.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < indicator.size(); ++i) {
    sum += indicator(i);
    out(i) = sum / static_cast<double>(i + 1);
  }
  return out;
}

State record_state(const TraceRecord& record, Eigen::Index rows, Eigen::Index cols) {
  if (record.state.size() > 0) return record.state;
  if (cols == 1 && record.column_hashes.empty()) {
    State x = State::Zero(rows, 1);
    for (Eigen::Index j : record.active) x(j) = 1;
    return x;
  }
  throw ContractError("trace record stores only column hashes; the state cannot be rebuilt");
}

Eigen::VectorXd inclusion_indicator(const Trace& trace, Eigen::Index entry) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(trace.records.size()));
  for (std::size_t t = 0; t < trace.records.size(); ++t) {
    const TraceRecord& r = trace.records[t];
    if (r.state.size() > 0) {
      HBS_REQUIRE(entry >= 0 && entry < r.state.size(), "entry outside the recorded state");
      out(t) = r.state(entry) != 0 ? 1.0 : 0.0;
    } else {
      HBS_REQUIRE(r.column_hashes.empty(), "trace records only column hashes");
      out(t) = std::binary_search(r.active.begin(), r.active.end(), entry) ? 1.0 : 0.0;
    }
  }
  return out;
}

Eigen::VectorXd running_inclusion(const Trace& trace, Eigen::Index entry) {
  return running_mean(inclusion_indicator(trace, entry));
}

ModeClassifier nearest_mode_classifier(std::vector<State> modes) {
  HBS_REQUIRE(!modes.empty(), "need at least one reference mode");
  return [modes = std::move(modes)](const State& x, int previous) {
    int best = -1;
    int best_distance = std::numeric_limits<int>::max();
    bool previous_is_nearest = false;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const int d = hamming_distance(x, modes[i]);
      if (d < best_distance) {
        best_distance = d;
        best = static_cast<int>(i);
        previous_is_nearest = static_cast<int>(i) == previous;
      } else if (d == best_distance && static_cast<int>(i) == previous) {
        previous_is_nearest = true;
      }
    }
    return previous_is_nearest ? previous : best;
  };
}

TransitionCount mode_transitions(const std::vector<int>& labels) {
  TransitionCount out;
  for (std::size_t t = 1; t < labels.size(); ++t) out.count += labels[t] != labels[t - 1];
  if (!labels.empty()) out.rate = static_cast<double>(out.count) / labels.size();
  return out;
}

std::vector<int> classify_trace(const Trace& trace, Eigen::Index rows, Eigen::Index cols,
                                const ModeClassifier& classifier) {
  std::vector<int> labels;
  labels.reserve(trace.records.size());
  int previous = -1;
  for (const TraceRecord& r : trace.records) {
    previous = classifier(record_state(r, rows, cols), previous);
    labels.push_back(previous);
  }
  return labels;
}

double grid_complexity(Eigen::Index size, int alphabet_size, int radius, int block_size) {
  HBS_REQUIRE(block_size >= 1 && radius >= 0, "grid cell needs K >= 1 and m >= 0");
  double total = 0.0;
  for (Eigen::Index start = 0; start < size; start += block_size) {
    const int k = static_cast<int>(std::min<Eigen::Index>(block_size, size - start));
    total += static_cast<double>(ball_volume(k, alphabet_size, std::min(radius, k)));
  }
  return total;
}

int thread_cap() {
  const char* env = std::getenv("HB_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    return std::max(1, std::stoi(env));
  } catch (const std::exception&) {
    throw ConfigError(std::string("HB_THREADS must be a positive integer, got '") + env + "'");
  }
}

std::vector<GridCell> efficiency_grid(const ModelTarget& model, const State& init,
                                      const ModeClassifier& classifier,
                                      const GridOptions& options) {
  HBS_REQUIRE(options.scheme == Scheme::kHbBlock || options.scheme == Scheme::kHb ||
                  options.scheme == Scheme::kPureMh,
              "efficiency grid runs hb, hb-block or pure-mh cells");
  HBS_REQUIRE(options.sweeps >= 1 && options.min_sweeps >= 1, "grid needs a positive budget");
  const Eigen::Index size = model.size();
  const int max_k =
      options.max_block_size > 0 ? std::min<int>(options.max_block_size, size) : static_cast<int>(size);
  std::vector<GridCell> cells;
  for (int k = 1; k <= max_k; ++k) {
    for (int m = 1; m <= k; ++m) {
      GridCell cell;
      cell.radius = m;
      cell.block_size = k;
      cell.complexity = grid_complexity(size, model.alphabet_size(), m, k);
      const double affordable = static_cast<double>(options.max_evaluations) / cell.complexity;
      cell.sweeps = std::max(options.min_sweeps,
                             std::min(options.sweeps, static_cast<long>(affordable)));
      cells.push_back(cell);
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t c = next.fetch_add(1);
      if (c >= cells.size()) return;
      GridCell& cell = cells[c];
      try {
        SamplerConfig config;
        config.scheme = options.scheme;
        config.block_size = cell.block_size;
        config.ball.radii = {cell.radius};
        config.iterations = cell.sweeps;
        config.burnin = 0;
        config.thin = 1;
        config.record_time = false;
        config.theta_update = ThetaUpdate::kNone;
        config.full_state_limit = 0;
        auto local = model.clone();
        Rng rng = Rng::stream(options.seed, c);
        std::vector<int> labels;
        labels.reserve(static_cast<std::size_t>(cell.sweeps));
        int previous = classifier(init, -1);
        Trace trace = run_chain(config, *local, rng, init,
                                [&](long, const State& x, const ModelTarget&) {
                                  previous = classifier(x, previous);
                                  labels.push_back(previous);
                                });
        const TransitionCount tc = mode_transitions(labels);
        cell.transitions = tc.count;
        cell.efficiency = tc.rate;
        cell.overall = cell.efficiency / cell.complexity;
        cell.move_bound_violations = trace.counters.move_bound_violations;
        cell.measured_complexity = static_cast<double>(trace.counters.candidate_evaluations) /
                                   static_cast<double>(trace.counters.sweeps);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(
      1, std::min<int>(options.threads > 0 ? options.threads : thread_cap(),
                       static_cast<int>(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return cells;
}

}  // namespace hbs
