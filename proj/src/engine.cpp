#include "hbs/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "hbs/error.hpp"
#include "hbs/numeric.hpp"

namespace hbs {

namespace {

Eigen::VectorXd stencil_distances(const BallStencil& stencil) {
  Eigen::VectorXd d(stencil.size());
  for (Eigen::Index i = 0; i < stencil.size(); ++i) d(i) = stencil.distance(i);
  return d;
}

void count(Counters* counters, std::uint64_t evaluations) {
  if (counters) counters->candidate_evaluations += evaluations;
}

struct FfbsResult {
  std::vector<Eigen::Index> choice;
  double log_normalizer = 0.0;
};

// Forward filtering backward sampling over per-column candidate sets.
// extra[c] is added to the emission log weights of column c.
FfbsResult ffbs(const ChainTarget& model, const std::vector<Eigen::MatrixXi>& candidates,
                const std::vector<Eigen::VectorXd>& extra, Rng* rng) {
  const std::size_t n = candidates.size();
  std::vector<Eigen::VectorXd> alpha(n);
  alpha[0] = model.log_initial(candidates[0]) + model.column_log_emissions(0, candidates[0]) +
             extra[0];
  for (std::size_t c = 1; c < n; ++c) {
    const double mx = alpha[c - 1].maxCoeff();
    if (!std::isfinite(mx)) {
      throw NumericalError("forward pass: all paths have zero weight", static_cast<long>(c - 1));
    }
    const Eigen::VectorXd p = (alpha[c - 1].array() - mx).exp().matrix();
    const Eigen::MatrixXd trans =
        model.log_transitions(candidates[c - 1], candidates[c]).array().exp().matrix();
    const Eigen::VectorXd mass = trans.transpose() * p;
    alpha[c] = (mass.array().log() + mx).matrix() +
               model.column_log_emissions(static_cast<Eigen::Index>(c), candidates[c]) + extra[c];
  }
  FfbsResult out;
  out.log_normalizer = model.log_constant() + log_sum_exp(alpha[n - 1]);
  if (!std::isfinite(out.log_normalizer)) {
    throw NumericalError("forward pass: restricted normalizer is not finite",
                         static_cast<long>(n - 1));
  }
  if (!rng) return out;
  out.choice.resize(n);
  out.choice[n - 1] = sample_log_categorical(alpha[n - 1], *rng, static_cast<long>(n - 1));
  for (std::size_t c = n - 1; c-- > 0;) {
    const Eigen::MatrixXi next = candidates[c + 1].col(out.choice[c + 1]);
    const Eigen::VectorXd w = alpha[c] + model.log_transitions(candidates[c], next).col(0);
    out.choice[c] = sample_log_categorical(w, *rng, static_cast<long>(c));
  }
  return out;
}

std::uint64_t product_volume(const std::vector<int>& sizes, const std::vector<int>& radii,
                             int alphabet_size, std::uint64_t limit) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::uint64_t v = 0;
    try {
      v = ball_volume(sizes[i], alphabet_size, radii[i]);
    } catch (const ContractError&) {
      return limit + 1;
    }
    if (__builtin_mul_overflow(total, v, &total) || total > limit) return limit + 1;
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::vector<int> BallSpec::radii_for(const std::vector<int>& sizes) const {
  HBS_REQUIRE(!radii.empty(), "ball spec has no radius");
  std::vector<int> out(sizes.size());
  if (radii.size() == 1) {
    HBS_REQUIRE(radii[0] >= 0, "radius must be nonnegative");
    for (std::size_t i = 0; i < sizes.size(); ++i) out[i] = std::min(radii[0], sizes[i]);
    return out;
  }
  HBS_REQUIRE(radii.size() == sizes.size(),
              "per-block radius list has " + std::to_string(radii.size()) + " entries for " +
                  std::to_string(sizes.size()) + " blocks");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    HBS_REQUIRE(radii[i] >= 0 && radii[i] <= sizes[i],
                "radius of block " + std::to_string(i) + " outside [0, K_i]");
    out[i] = radii[i];
  }
  return out;
}

bool BallSpec::ergodic() const {
  switch (distribution) {
    case RadiusDistribution::kGibbsMimic:
      return true;
    case RadiusDistribution::kPerBlockCategorical:
      for (std::size_t j = 1; j < radius_probs.size(); ++j)
        if (radius_probs[j] > 0.0) return true;
      return false;
    case RadiusDistribution::kFixed:
      break;
  }
  return std::any_of(radii.begin(), radii.end(), [](int m) { return m > 0; });
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kHb: return "hb";
    case Scheme::kHbBlock: return "hb-block";
    case Scheme::kBlockGibbs: return "block-gibbs";
    case Scheme::kPureMh: return "pure-mh";
  }
  return "?";
}

std::string to_string(ThetaUpdate mode) {
  switch (mode) {
    case ThetaUpdate::kConditional: return "conditional-gibbs";
    case ThetaUpdate::kJointMh: return "joint-mh";
    case ThetaUpdate::kNone: return "none";
  }
  return "?";
}

std::string to_string(RadiusDistribution dist) {
  switch (dist) {
    case RadiusDistribution::kFixed: return "fixed";
    case RadiusDistribution::kPerBlockCategorical: return "per-block-categorical";
    case RadiusDistribution::kGibbsMimic: return "gibbs-mimic";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "hb") return Scheme::kHb;
  if (name == "hb-block") return Scheme::kHbBlock;
  if (name == "block-gibbs") return Scheme::kBlockGibbs;
  if (name == "pure-mh") return Scheme::kPureMh;
  throw ConfigError("unknown scheme '" + name + "'");
}

ThetaUpdate parse_theta_update(const std::string& name) {
  if (name == "conditional-gibbs" || name == "conditional") return ThetaUpdate::kConditional;
  if (name == "joint-mh") return ThetaUpdate::kJointMh;
  if (name == "none") return ThetaUpdate::kNone;
  throw ConfigError("unknown theta update mode '" + name + "'");
}

RadiusDistribution parse_radius_distribution(const std::string& name) {
  if (name == "fixed") return RadiusDistribution::kFixed;
  if (name == "per-block-categorical") return RadiusDistribution::kPerBlockCategorical;
  if (name == "gibbs-mimic") return RadiusDistribution::kGibbsMimic;
  throw ConfigError("unknown radius distribution '" + name + "'");
}

// ---------------------------------------------------------------------------
// Auxiliary variable and radii

State resample_auxiliary(const State& x, const Partition& partition,
                         const std::vector<int>& radii, double lambda, int alphabet_size,
                         Rng& rng) {
  HBS_REQUIRE(radii.size() == partition.size(), "one radius per block required");
  State u = x;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (radii[i] == 0) continue;
    scatter(u, partition[i],
            sample_in_ball(gather(x, partition[i]), alphabet_size, radii[i], lambda, rng));
  }
  return u;
}

std::vector<int> draw_radius_vector(const BallSpec& spec, const std::vector<int>& block_sizes,
                                    Rng& rng) {
  switch (spec.distribution) {
    case RadiusDistribution::kFixed:
      return spec.radii_for(block_sizes);
    case RadiusDistribution::kPerBlockCategorical: {
      const auto& probs = spec.radius_probs;
      HBS_REQUIRE(!probs.empty(), "per-block-categorical needs radius probabilities");
      Eigen::VectorXd logp(static_cast<Eigen::Index>(probs.size()));
      for (std::size_t j = 0; j < probs.size(); ++j) {
        HBS_REQUIRE(probs[j] >= 0.0, "radius probabilities must be nonnegative");
        logp(j) = std::log(probs[j]);
      }
      std::vector<int> out(block_sizes.size());
      for (std::size_t i = 0; i < block_sizes.size(); ++i) {
        out[i] = std::min(static_cast<int>(sample_log_categorical(logp, rng)), block_sizes[i]);
      }
      return out;
    }
    case RadiusDistribution::kGibbsMimic: {
      std::vector<int> out(block_sizes.size(), 0);
      if (out.empty()) return out;
      const auto pick = rng.uniform_int(static_cast<std::int64_t>(block_sizes.size()));
      out[pick] = block_sizes[pick];
      return out;
    }
  }
  throw ConfigError("unknown radius distribution");
}

const BallStencil& StencilCache::get(int block_length, int alphabet_size, int radius) {
  auto key = std::make_tuple(block_length, alphabet_size, radius);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_
             .emplace(key, std::make_unique<BallStencil>(block_length, alphabet_size, radius))
             .first;
  }
  return *it->second;
}

// ---------------------------------------------------------------------------
// Exact state updates restricted to a ball

SliceDraw hb_state_update_factorized(const FactorizedTarget& model, const State& u,
                                     const std::vector<int>& radii, double lambda, Rng* rng,
                                     StencilCache& stencils, Counters* counters) {
  HBS_REQUIRE(static_cast<Eigen::Index>(radii.size()) == u.cols(), "one radius per column");
  const int rows = static_cast<int>(u.rows());
  SliceDraw out{u, model.log_constant()};
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    const BallStencil& stencil = stencils.get(rows, model.alphabet_size(), radii[c]);
    const Eigen::MatrixXi members = stencil.members(u.col(c));
    Eigen::VectorXd w = model.column_log_factors(c, members);
    if (lambda > 0.0) w -= lambda * stencil_distances(stencil);
    count(counters, static_cast<std::uint64_t>(members.cols()));
    const double lse = log_sum_exp(w);
    if (!std::isfinite(lse)) {
      throw NumericalError("all candidates of column have zero weight", static_cast<long>(c));
    }
    out.log_normalizer += lse;
    if (rng) out.x.col(c) = members.col(sample_log_categorical(w, *rng, static_cast<long>(c)));
  }
  return out;
}

SliceDraw hb_state_update_chain(const ChainTarget& model, const State& u,
                                const std::vector<int>& radii, double lambda, Rng* rng,
                                StencilCache& stencils, Counters* counters) {
  HBS_REQUIRE(static_cast<Eigen::Index>(radii.size()) == u.cols(), "one radius per column");
  const int rows = static_cast<int>(u.rows());
  const auto n = static_cast<std::size_t>(u.cols());
  std::vector<Eigen::MatrixXi> candidates(n);
  std::vector<Eigen::VectorXd> extra(n);
  for (std::size_t c = 0; c < n; ++c) {
    const BallStencil& stencil = stencils.get(rows, model.alphabet_size(), radii[c]);
    candidates[c] = stencil.members(u.col(c));
    extra[c] = lambda > 0.0 ? Eigen::VectorXd(-lambda * stencil_distances(stencil))
                            : Eigen::VectorXd::Zero(stencil.size());
    count(counters, static_cast<std::uint64_t>(stencil.size()));
  }
  const FfbsResult f = ffbs(model, candidates, extra, rng);
  SliceDraw out{u, f.log_normalizer};
  if (rng) {
    for (std::size_t c = 0; c < n; ++c) out.x.col(c) = candidates[c].col(f.choice[c]);
  }
  return out;
}

SliceDraw hb_state_update_joint(const ModelTarget& model, const State& u,
                                const Partition& partition, const std::vector<int>& radii,
                                double lambda, Rng* rng, StencilCache& stencils,
                                std::uint64_t limit, Counters* counters) {
  HBS_REQUIRE(radii.size() == partition.size(), "one radius per block required");
  const std::size_t p = partition.size();
  const std::uint64_t total =
      product_volume(block_sizes(partition), radii, model.alphabet_size(), limit);
  if (total > limit) {
    throw ConfigError("joint Hamming ball has more than " + std::to_string(limit) +
                      " members; use hb-block or smaller radii");
  }
  std::vector<Eigen::MatrixXi> members(p);
  std::vector<Eigen::VectorXd> dist(p);
  for (std::size_t i = 0; i < p; ++i) {
    const BallStencil& stencil =
        stencils.get(static_cast<int>(partition[i].size()), model.alphabet_size(), radii[i]);
    members[i] = stencil.members(gather(u, partition[i]));
    dist[i] = stencil_distances(stencil);
  }

  // Odometer over member indices, first block most significant.
  std::vector<Eigen::Index> digit(p, 0);
  State work = u;
  Eigen::VectorXd logw(static_cast<Eigen::Index>(total));
  for (std::uint64_t t = 0; t < total; ++t) {
    double penalty = 0.0;
    for (std::size_t i = 0; i < p; ++i) penalty += dist[i](digit[i]);
    logw(static_cast<Eigen::Index>(t)) = model.log_joint(work) - lambda * penalty;
    for (std::size_t i = p; i-- > 0;) {
      if (++digit[i] < members[i].cols()) {
        scatter(work, partition[i], members[i].col(digit[i]));
        break;
      }
      digit[i] = 0;
      scatter(work, partition[i], members[i].col(0));
    }
  }
  count(counters, total);

  SliceDraw out{u, log_sum_exp(logw)};
  if (!std::isfinite(out.log_normalizer)) {
    throw NumericalError("all members of the joint ball have zero weight");
  }
  if (rng) {
    auto pick = static_cast<std::uint64_t>(sample_log_categorical(logw, *rng));
    for (std::size_t i = p; i-- > 0;) {
      const auto m = static_cast<std::uint64_t>(members[i].cols());
      scatter(out.x, partition[i], members[i].col(static_cast<Eigen::Index>(pick % m)));
      pick /= m;
    }
  }
  return out;
}

SliceDraw sample_slice(const ModelTarget& model, const State& center, const Partition& partition,
                       const std::vector<int>& radii, double lambda, Rng* rng,
                       StencilCache& stencils, std::uint64_t limit, Counters* counters) {
  switch (model.structure()) {
    case Structure::kFactorized:
      return hb_state_update_factorized(static_cast<const FactorizedTarget&>(model), center,
                                        radii, lambda, rng, stencils, counters);
    case Structure::kMarkovChain:
      return hb_state_update_chain(static_cast<const ChainTarget&>(model), center, radii, lambda,
                                   rng, stencils, counters);
    case Structure::kUnstructured:
      break;
  }
  return hb_state_update_joint(model, center, partition, radii, lambda, rng, stencils, limit,
                               counters);
}

// ---------------------------------------------------------------------------
// Sequential block updates

void hb_block_sweep(State& x, const ModelTarget& model, const Partition& partition,
                    const std::vector<int>& radii, double lambda, Rng& rng,
                    StencilCache& stencils, Counters* counters) {
  HBS_REQUIRE(radii.size() == partition.size(), "one radius per block required");
  const int s = model.alphabet_size();
  for (std::size_t i = 0; i < partition.size(); ++i) {
    const Indices& block = partition[i];
    const int k = static_cast<int>(block.size());
    const BallStencil& stencil = stencils.get(k, s, radii[i]);
    const Block u = sample_in_ball(gather(x, block), s, radii[i], lambda, rng);
    const Eigen::MatrixXi members = stencil.members(u);
    Eigen::VectorXd w = model.block_scores(x, block, members);
    if (lambda > 0.0) w -= lambda * stencil_distances(stencil);
    count(counters, static_cast<std::uint64_t>(members.cols()));
    scatter(x, block, members.col(sample_log_categorical(w, rng, static_cast<long>(i))));
  }
}

void chain_row_gibbs(State& x, const ChainTarget& model, const Partition& row_blocks, Rng& rng,
                     Counters* counters) {
  const Eigen::Index rows = x.rows();
  const auto n = static_cast<std::size_t>(x.cols());
  const int s = model.alphabet_size();
  for (const Indices& block : row_blocks) {
    std::vector<Eigen::Index> group;
    for (Eigen::Index idx : block)
      if (idx < rows) group.push_back(idx);
    const int g = static_cast<int>(group.size());
    HBS_REQUIRE(g >= 1 && static_cast<std::size_t>(g) * n == block.size(),
                "row block must cover whole rows");
    // Every joint value of the group's rows, other rows fixed at x.
    const BallStencil all(g, s, g);
    const Block zeros = Block::Zero(g);
    std::vector<Eigen::MatrixXi> candidates(n);
    std::vector<Eigen::VectorXd> extra(n, Eigen::VectorXd::Zero(all.size()));
    Block value(g);
    for (std::size_t c = 0; c < n; ++c) {
      candidates[c] = x.col(static_cast<Eigen::Index>(c)).replicate(1, all.size());
      for (Eigen::Index j = 0; j < all.size(); ++j) {
        all.member(zeros, j, value);
        for (int r = 0; r < g; ++r) candidates[c](group[r], j) = value(r);
      }
    }
    count(counters, static_cast<std::uint64_t>(all.size()) * n);
    const FfbsResult f = ffbs(model, candidates, extra, &rng);
    for (std::size_t c = 0; c < n; ++c) {
      x.col(static_cast<Eigen::Index>(c)) = candidates[c].col(f.choice[c]);
    }
  }
}

// ---------------------------------------------------------------------------
// Parameter updates and the pure Metropolis-Hastings variant

void theta_update_conditional(ModelTarget& model, const State& x, Rng& rng) {
  model.update_parameters(x, rng);
}

JointMhResult theta_update_joint_mh(ModelTarget& model, const State& u,
                                    const Partition& partition, const std::vector<int>& radii,
                                    double lambda, const ParameterProposal& proposal, Rng& rng,
                                    StencilCache& stencils, std::uint64_t limit,
                                    Counters* counters) {
  const Eigen::VectorXd theta = model.parameters();
  const double log_z =
      sample_slice(model, u, partition, radii, lambda, nullptr, stencils, limit, counters)
          .log_normalizer;
  const Eigen::VectorXd proposed = proposal.propose(theta, rng);
  const double log_q_forward = proposal.log_density(proposed, theta);
  const double log_q_reverse = proposal.log_density(theta, proposed);
  if (counters) ++counters->theta_proposals;

  JointMhResult result;
  if (!std::isfinite(log_q_forward) || !std::isfinite(log_q_reverse)) {
    if (counters) ++counters->theta_nonfinite;
    result.log_ratio = kNegInf;
  } else {
    model.set_parameters(proposed);
    double log_z_new = kNegInf;
    try {
      log_z_new =
          sample_slice(model, u, partition, radii, lambda, nullptr, stencils, limit, counters)
              .log_normalizer;
    } catch (const NumericalError&) {
      // A proposal with no supported state in the slice is rejected.
    }
    result.log_ratio = log_z_new - log_z + log_q_reverse - log_q_forward;
    result.accepted = std::log(rng.uniform()) < result.log_ratio;
    if (!result.accepted) model.set_parameters(theta);
  }
  if (result.accepted && counters) ++counters->theta_accepts;
  result.x =
      sample_slice(model, u, partition, radii, lambda, &rng, stencils, limit, counters).x;
  return result;
}

bool pure_mh_step(State& x, const ModelTarget& model, const Partition& partition,
                  const std::vector<int>& radii, Rng& rng, StencilCache& stencils,
                  std::uint64_t limit, Counters* counters) {
  SliceDraw forward = sample_slice(model, x, partition, radii, 0.0, &rng, stencils, limit, counters);
  const double log_z_reverse =
      sample_slice(model, forward.x, partition, radii, 0.0, nullptr, stencils, limit, counters)
          .log_normalizer;
  const bool accept = std::log(rng.uniform()) < forward.log_normalizer - log_z_reverse;
  if (counters) {
    ++counters->state_proposals;
    if (accept) ++counters->state_accepts;
  }
  if (accept) x = std::move(forward.x);
  return accept;
}

// ---------------------------------------------------------------------------
// Sampler

Sampler::Sampler(SamplerConfig config, ModelTarget& model)
    : config_(std::move(config)), model_(model) {
  const auto& c = config_;
  if (c.iterations < 0) throw ConfigError("iterations must be nonnegative");
  if (c.thin < 1) throw ConfigError("thin must be >= 1");
  if (c.effective_burnin() > c.iterations) throw ConfigError("burn-in exceeds iterations");
  if (c.block_size < 1) throw ConfigError("block size K must be >= 1");
  if (!(c.ball.lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");

  const bool chain = model.structure() == Structure::kMarkovChain;
  if (c.axis == BlockAxis::kRows && !(chain && c.scheme == Scheme::kBlockGibbs)) {
    throw ConfigError("row blocks are only supported by block-gibbs on chain-structured models");
  }
  if (c.theta_update == ThetaUpdate::kJointMh) {
    if (c.scheme != Scheme::kHb) throw ConfigError("joint-mh parameter updates require scheme hb");
    proposal_ = model.joint_proposal();
  }
  if (c.ball.distribution == RadiusDistribution::kPerBlockCategorical) {
    double total = 0.0;
    for (double p : c.ball.radius_probs) {
      if (!(p >= 0.0)) throw ConfigError("radius probabilities must be nonnegative");
      total += p;
    }
    if (!(total > 0.0)) throw ConfigError("radius probabilities must not all be zero");
  }

  Rng probe(0);
  const std::vector<int> sizes = block_sizes(draw_partition(probe));
  std::vector<int> worst;
  try {
    worst = config_.ball.radii_for(sizes);
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  if (c.scheme == Scheme::kBlockGibbs) worst = sizes;
  if (c.ball.distribution == RadiusDistribution::kPerBlockCategorical) {
    int largest = 0;
    for (std::size_t j = 0; j < c.ball.radius_probs.size(); ++j)
      if (c.ball.radius_probs[j] > 0.0) largest = static_cast<int>(j);
    for (std::size_t i = 0; i < sizes.size(); ++i) worst[i] = std::min(largest, sizes[i]);
  }
  const bool joint = model.structure() == Structure::kUnstructured &&
                     (c.scheme == Scheme::kHb || c.scheme == Scheme::kPureMh);
  std::uint64_t volume = 0;
  if (joint && c.ball.distribution == RadiusDistribution::kGibbsMimic) {
    // One block at full radius, the rest fixed.
    for (int k : sizes)
      volume = std::max(volume, product_volume({k}, {k}, model.alphabet_size(),
                                               c.joint_enumeration_limit));
  } else if (joint) {
    volume = product_volume(sizes, worst, model.alphabet_size(), c.joint_enumeration_limit);
  }
  if (volume > c.joint_enumeration_limit) {
    throw ConfigError("scheme " + to_string(c.scheme) +
                      " on an unstructured target would enumerate more than " +
                      std::to_string(c.joint_enumeration_limit) +
                      " joint ball members; reduce K or m or use hb-block");
  }
}

Partition Sampler::draw_partition(Rng& rng) const {
  if (model_.structure() == Structure::kUnstructured) {
    return random_partition(model_.size(), config_.block_size, rng);
  }
  if (config_.axis == BlockAxis::kRows) {
    return row_partition(model_.rows(), model_.cols(), config_.block_size);
  }
  return column_partition(model_.rows(), model_.cols());
}

void Sampler::step(State& x, Rng& rng) {
  const Partition partition = draw_partition(rng);
  const std::vector<int> sizes = block_sizes(partition);
  last_radii_ = config_.scheme == Scheme::kBlockGibbs
                    ? sizes
                    : draw_radius_vector(config_.ball, sizes, rng);
  const auto& radii = last_radii_;
  const double lambda = config_.ball.lambda;
  const auto limit = config_.joint_enumeration_limit;
  const bool conditional = config_.theta_update == ThetaUpdate::kConditional;
  const State before = x;
  const int radius_sum = std::accumulate(radii.begin(), radii.end(), 0);
  int bound = 2 * radius_sum;

  switch (config_.scheme) {
    case Scheme::kHb: {
      const State u = resample_auxiliary(x, partition, radii, lambda, model_.alphabet_size(), rng);
      if (conditional) theta_update_conditional(model_, x, rng);
      if (config_.theta_update == ThetaUpdate::kJointMh) {
        model_.update_unproposed_parameters(x, rng);
        if (proposal_) {
          x = theta_update_joint_mh(model_, u, partition, radii, lambda, *proposal_, rng,
                                    stencils_, limit, &counters_)
                  .x;
          break;
        }
      }
      x = sample_slice(model_, u, partition, radii, lambda, &rng, stencils_, limit, &counters_).x;
      break;
    }
    case Scheme::kHbBlock:
    case Scheme::kBlockGibbs:
      if (conditional) theta_update_conditional(model_, x, rng);
      if (config_.axis == BlockAxis::kRows) {
        chain_row_gibbs(x, static_cast<const ChainTarget&>(model_), partition, rng, &counters_);
        bound = static_cast<int>(x.size());
      } else {
        hb_block_sweep(x, model_, partition, radii, lambda, rng, stencils_, &counters_);
      }
      break;
    case Scheme::kPureMh:
      if (conditional) theta_update_conditional(model_, x, rng);
      pure_mh_step(x, model_, partition, radii, rng, stencils_, limit, &counters_);
      bound = radius_sum;
      break;
  }

  const int moved = hamming_distance(before, x);
  counters_.max_move = std::max(counters_.max_move, moved);
  if (moved > bound) ++counters_.move_bound_violations;
  ++counters_.sweeps;
}

std::uint64_t column_hash(const Eigen::Ref<const Eigen::VectorXi>& column) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(column(i)));
    h *= 0x100000001b3ULL;
  }
  return h;
}

Trace run_chain(const SamplerConfig& config, ModelTarget& model, Rng& rng,
                const std::optional<State>& init, const TraceObserver& observer) {
  Sampler sampler(config, model);
  State x = init ? *init : model.initial_state();
  HBS_REQUIRE(x.rows() == model.rows() && x.cols() == model.cols(),
              "initial state has the wrong shape");
  HBS_REQUIRE(x.size() == 0 || (x.minCoeff() >= 0 && x.maxCoeff() < model.alphabet_size()),
              "initial state uses symbols outside the alphabet");

  Trace trace;
  trace.parameter_names = model.parameter_names();
  const long burnin = config.effective_burnin();
  trace.records.reserve(static_cast<std::size_t>((config.iterations - burnin) / config.thin));
  const bool binary_vector = model.cols() == 1 && model.alphabet_size() == 2;
  const auto start = std::chrono::steady_clock::now();

  for (long t = 0; t < config.iterations; ++t) {
    try {
      sampler.step(x, rng);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(t) + ": " + e.what(), e.block());
    }
    if (t < burnin || (t - burnin + 1) % config.thin != 0) continue;

    TraceRecord rec;
    rec.iteration = t;
    rec.log_joint = model.log_joint(x);
    if (config.record_time) {
      rec.elapsed_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
              .count();
    }
    rec.theta = model.parameters();
    if (binary_vector) {
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (x(i, 0) != 0) rec.active.push_back(i);
    }
    if (x.size() <= config.full_state_limit) {
      rec.state = x;
    } else if (!binary_vector) {
      rec.column_hashes.reserve(static_cast<std::size_t>(x.cols()));
      for (Eigen::Index c = 0; c < x.cols(); ++c) rec.column_hashes.push_back(column_hash(x.col(c)));
    }
    if (observer) observer(t, x, model);
    trace.records.push_back(std::move(rec));
  }
  trace.counters = sampler.counters();
  return trace;
}

}  // namespace hbs
