#ifndef HBS_DIAGNOSTICS_HPP_
#define HBS_DIAGNOSTICS_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "hbs/engine.hpp"
#include "hbs/model.hpp"
#include "hbs/state.hpp"

namespace hbs {

struct IatEstimate {
  double value = 1.0;
  /// Set for zero-variance series; `value` is then +inf.
  bool infinite = false;
};

/// Integrated autocorrelation time by the initial positive sequence estimator:
/// paired autocorrelations are summed until a pair is nonpositive. Estimates
/// below 1 are raised to 1. Needs at least 10 values.
IatEstimate iat(const Eigen::Ref<const Eigen::VectorXd>& series);

/// n / IAT, or 0 when the IAT is infinite.
double ess(const Eigen::Ref<const Eigen::VectorXd>& series);

/// Prefix means of a 0/1 indicator sequence.
Eigen::VectorXd running_mean(const Eigen::Ref<const Eigen::VectorXd>& indicator);

/// Indicator of position `entry` across the recorded states of a trace.
Eigen::VectorXd inclusion_indicator(const Trace& trace, Eigen::Index entry);

/// running_mean(inclusion_indicator(trace, entry)).
Eigen::VectorXd running_inclusion(const Trace& trace, Eigen::Index entry);

/// Rebuilds the recorded state of a trace record (binary vectors from their
/// active set, otherwise the stored state). Throws when only hashes exist.
State record_state(const TraceRecord& record, Eigen::Index rows, Eigen::Index cols);

/// Label of a state given the previous label (-1 for the first state).
using ModeClassifier = std::function<int(const State& x, int previous)>;

/// Nearest reference state by Hamming distance; ties keep the previous label
/// when it is among the nearest, otherwise the lowest index wins.
ModeClassifier nearest_mode_classifier(std::vector<State> modes);

struct TransitionCount {
  long count = 0;
  double rate = 0.0;  // count / number of labels
};

TransitionCount mode_transitions(const std::vector<int>& labels);

/// Labels every recorded state of a trace.
std::vector<int> classify_trace(const Trace& trace, Eigen::Index rows, Eigen::Index cols,
                                const ModeClassifier& classifier);

struct GridCell {
  int radius = 0;
  int block_size = 0;
  /// Candidate evaluations per sweep, sum of per-block ball volumes.
  double complexity = 0.0;
  /// Mode transitions per sweep.
  double efficiency = 0.0;
  double overall = 0.0;  // efficiency / complexity
  long sweeps = 0;
  long transitions = 0;
  /// Candidate evaluations counted by the engine, per sweep.
  double measured_complexity = 0.0;
  std::uint64_t move_bound_violations = 0;
};

struct GridOptions {
  Scheme scheme = Scheme::kHbBlock;
  long sweeps = 2000;
  /// Per-cell cap on candidate evaluations; the sweep count is reduced to fit.
  std::uint64_t max_evaluations = 50'000'000;
  long min_sweeps = 200;
  std::uint64_t seed = 0;
  /// Maximum concurrent cells; 0 reads HB_THREADS (default 1).
  int threads = 0;
  /// Largest block size in the grid; 0 means the state size.
  int max_block_size = 0;
};

/// sum_i ball_volume(K_i, S, min(m, K_i)) over the contiguous chunks of a
/// length-`size` vector cut into blocks of `block_size`.
double grid_complexity(Eigen::Index size, int alphabet_size, int radius, int block_size);

/// Runs every (m, K) with 1 <= m <= K <= D from `init` and reports mode
/// transitions per sweep against the cost of a sweep. Cells run concurrently
/// on clones of `model` with independent streams.
std::vector<GridCell> efficiency_grid(const ModelTarget& model, const State& init,
                                      const ModeClassifier& classifier,
                                      const GridOptions& options);

/// Concurrency cap from HB_THREADS (at least 1).
int thread_cap();

}  // namespace hbs

#endif  // HBS_DIAGNOSTICS_HPP_
