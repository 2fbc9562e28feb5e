#ifndef HBS_ENGINE_HPP_
#define HBS_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hbs/ball.hpp"
#include "hbs/model.hpp"
#include "hbs/rng.hpp"
#include "hbs/state.hpp"

namespace hbs {

enum class RadiusDistribution {
  kFixed,                // configured radii every iteration
  kPerBlockCategorical,  // m_i ~ Categorical(radius_probs) independently per block
  kGibbsMimic,           // one uniformly chosen block gets m_i = K_i, all others 0
};

/// Hamming-ball radii (one entry broadcasts to every block), weighting
/// parameter lambda and the distribution the radii are drawn from.
struct BallSpec {
  std::vector<int> radii{1};
  double lambda = 0.0;
  RadiusDistribution distribution = RadiusDistribution::kFixed;
  /// Probability of radius 0, 1, ... for kPerBlockCategorical.
  std::vector<double> radius_probs;

  /// Radii for blocks of the given sizes. A single radius is clipped to each
  /// block's size; a per-block list must match the block count and satisfy
  /// m_i <= K_i.
  std::vector<int> radii_for(const std::vector<int>& sizes) const;

  /// A necessary condition for ergodicity: some block can move.
  bool ergodic() const;
};

enum class Scheme { kHb, kHbBlock, kBlockGibbs, kPureMh };
enum class ThetaUpdate { kConditional, kJointMh, kNone };
/// Block layout for matrix states of chain-structured models.
enum class BlockAxis { kColumns, kRows };

struct SamplerConfig {
  Scheme scheme = Scheme::kHb;
  BallSpec ball;
  /// Block size K for unstructured (vector) targets; rows per group for row blocks.
  int block_size = 1;
  BlockAxis axis = BlockAxis::kColumns;
  long iterations = 1000;
  /// Negative means 10% of iterations.
  long burnin = -1;
  long thin = 1;
  std::uint64_t seed = 0;
  ThetaUpdate theta_update = ThetaUpdate::kConditional;
  bool record_time = true;
  /// States with at most this many entries are stored whole in the trace.
  Eigen::Index full_state_limit = 256;
  /// Largest product-of-balls enumerated by the joint unstructured update.
  std::uint64_t joint_enumeration_limit = 1'000'000;

  long effective_burnin() const { return burnin < 0 ? iterations / 10 : burnin; }
};

std::string to_string(Scheme scheme);
std::string to_string(ThetaUpdate mode);
std::string to_string(RadiusDistribution dist);
Scheme parse_scheme(const std::string& name);
ThetaUpdate parse_theta_update(const std::string& name);
RadiusDistribution parse_radius_distribution(const std::string& name);

struct Counters {
  std::uint64_t sweeps = 0;
  std::uint64_t candidate_evaluations = 0;
  std::uint64_t state_proposals = 0;  // pure-mh
  std::uint64_t state_accepts = 0;
  std::uint64_t theta_proposals = 0;  // joint-mh
  std::uint64_t theta_accepts = 0;
  std::uint64_t theta_nonfinite = 0;
  std::uint64_t move_bound_violations = 0;
  int max_move = 0;
};

struct TraceRecord {
  long iteration = 0;
  double log_joint = 0.0;
  double elapsed_ms = 0.0;
  Eigen::VectorXd theta;
  State state;                               // empty unless small
  std::vector<Eigen::Index> active;          // nonzero entries of a vector state
  std::vector<std::uint64_t> column_hashes;  // large matrix states
};

struct Trace {
  std::vector<std::string> parameter_names;
  std::vector<TraceRecord> records;
  Counters counters;
};

/// Draw from p(U | X): each block independently from its (lambda-weighted) ball.
State resample_auxiliary(const State& x, const Partition& partition,
                         const std::vector<int>& radii, double lambda, int alphabet_size,
                         Rng& rng);

/// Radii for one iteration under `spec.distribution`.
std::vector<int> draw_radius_vector(const BallSpec& spec, const std::vector<int>& block_sizes,
                                    Rng& rng);

struct SliceDraw {
  State x;
  /// log sum_{X in H_m(U)} p(y, X, theta) exp(-lambda d(X, U)).
  double log_normalizer = 0.0;
};

/// Memoized ball stencils keyed by (K, S, m).
class StencilCache {
 public:
  const BallStencil& get(int block_length, int alphabet_size, int radius);

 private:
  std::map<std::tuple<int, int, int>, std::unique_ptr<BallStencil>> cache_;
};

/// Exact draw from p(X | theta, U, y) for column-factorized targets. When
/// `rng` is null only the normalizer is computed (and `x` is U).
SliceDraw hb_state_update_factorized(const FactorizedTarget& model, const State& u,
                                     const std::vector<int>& radii, double lambda, Rng* rng,
                                     StencilCache& stencils, Counters* counters = nullptr);

/// Forward filtering over the ball members of each column, then backward
/// sampling. Same null-rng convention.
SliceDraw hb_state_update_chain(const ChainTarget& model, const State& u,
                                const std::vector<int>& radii, double lambda, Rng* rng,
                                StencilCache& stencils, Counters* counters = nullptr);

/// Enumerates the product of the per-block balls for targets without usable
/// structure. Throws ConfigError above `limit` joint members.
SliceDraw hb_state_update_joint(const ModelTarget& model, const State& u,
                                const Partition& partition, const std::vector<int>& radii,
                                double lambda, Rng* rng, StencilCache& stencils,
                                std::uint64_t limit, Counters* counters = nullptr);

/// Dispatches on model.structure(): factorized and chain targets use columns
/// as blocks, unstructured targets use `partition`.
SliceDraw sample_slice(const ModelTarget& model, const State& center, const Partition& partition,
                       const std::vector<int>& radii, double lambda, Rng* rng,
                       StencilCache& stencils, std::uint64_t limit,
                       Counters* counters = nullptr);

/// Block Hamming ball sweep: for each block in order, u_i from the ball of
/// x_i, then x_i from its conditional restricted to the ball of u_i.
void hb_block_sweep(State& x, const ModelTarget& model, const Partition& partition,
                    const std::vector<int>& radii, double lambda, Rng& rng,
                    StencilCache& stencils, Counters* counters = nullptr);

/// Exact block Gibbs update of groups of rows of a chain target, by forward
/// filtering backward sampling over each group's S^g joint values.
void chain_row_gibbs(State& x, const ChainTarget& model, const Partition& row_blocks, Rng& rng,
                     Counters* counters = nullptr);

/// theta <- p(theta | X, y).
void theta_update_conditional(ModelTarget& model, const State& x, Rng& rng);

struct JointMhResult {
  State x;
  bool accepted = false;
  double log_ratio = 0.0;
};

/// Joint update of (theta, X) given U: propose theta' ~ q, accept with
/// min(1, p(theta', U, y) q(theta | theta') / p(theta, U, y) q(theta' | theta)),
/// then draw X from the slice at the retained parameters.
JointMhResult theta_update_joint_mh(ModelTarget& model, const State& u,
                                    const Partition& partition, const std::vector<int>& radii,
                                    double lambda, const ParameterProposal& proposal, Rng& rng,
                                    StencilCache& stencils, std::uint64_t limit,
                                    Counters* counters = nullptr);

/// Metropolis-Hastings with the target sliced to H_m(X) as proposal; accepted
/// with min(1, Z_m(X) / Z_m(X')). Returns whether the proposal was accepted.
bool pure_mh_step(State& x, const ModelTarget& model, const Partition& partition,
                  const std::vector<int>& radii, Rng& rng, StencilCache& stencils,
                  std::uint64_t limit, Counters* counters = nullptr);

/// One configured scheme bound to a model. `step` performs one full iteration.
class Sampler {
 public:
  Sampler(SamplerConfig config, ModelTarget& model);

  void step(State& x, Rng& rng);

  const SamplerConfig& config() const noexcept { return config_; }
  const Counters& counters() const noexcept { return counters_; }
  /// Radii used by the last iteration.
  const std::vector<int>& last_radii() const noexcept { return last_radii_; }

  /// Block partition for the next iteration.
  Partition draw_partition(Rng& rng) const;

 private:
  SamplerConfig config_;
  ModelTarget& model_;
  std::unique_ptr<ParameterProposal> proposal_;
  StencilCache stencils_;
  Counters counters_;
  std::vector<int> last_radii_;
};

/// Called for every recorded iteration with the current state.
using TraceObserver = std::function<void(long iteration, const State& x, const ModelTarget&)>;

/// Runs `config.iterations` iterations from `init` (model.initial_state() when
/// absent) and records every thin-th post-burn-in iteration.
Trace run_chain(const SamplerConfig& config, ModelTarget& model, Rng& rng,
                const std::optional<State>& init = std::nullopt,
                const TraceObserver& observer = {});

/// 64-bit FNV-1a hash of a column of symbols.
std::uint64_t column_hash(const Eigen::Ref<const Eigen::VectorXi>& column);

}  // namespace hbs

#endif  // HBS_ENGINE_HPP_
