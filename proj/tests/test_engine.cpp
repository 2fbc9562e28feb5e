#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "chi_square.hpp"
#include "fixtures.hpp"
#include "hbs/ball.hpp"
#include "hbs/engine.hpp"
#include "hbs/error.hpp"
#include "hbs/models/flat.hpp"
#include "hbs/numeric.hpp"
#include "hbs/oracle.hpp"

namespace hbs {
namespace {

using testing::chi_square_p_value;
using testing::TableChainModel;
using testing::TableFactorModel;

SamplerConfig make_config(Scheme scheme, int radius, int block_size = 1) {
  SamplerConfig c;
  c.scheme = scheme;
  c.ball.radii = {radius};
  c.block_size = block_size;
  c.theta_update = ThetaUpdate::kNone;
  c.burnin = 0;
  return c;
}

// Brute-force log of sum over X in H_m(U) of p(y, X) exp(-lambda d(X, U)),
// blocks given as flat index lists.
double brute_force_normalizer(const ModelTarget& model, const ExactTable& table, const State& u,
                              const Partition& partition, const std::vector<int>& radii,
                              double lambda) {
  std::vector<double> terms;
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    const State x = table.state(i);
    bool inside = true;
    int total = 0;
    for (std::size_t b = 0; b < partition.size(); ++b) {
      int d = 0;
      for (Eigen::Index k : partition[b]) d += x(k) != u(k);
      inside = inside && d <= radii[b];
      total += d;
    }
    if (inside) terms.push_back(model.log_joint(x) - lambda * total);
  }
  return log_sum_exp(Eigen::Map<Eigen::VectorXd>(terms.data(), terms.size()));
}

State random_state(Eigen::Index rows, Eigen::Index cols, int s, Rng& rng) {
  State x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<int>(rng.uniform_int(s));
  return x;
}

TEST(Auxiliary, StaysInsideBallAndLeavesZeroRadiusBlocks) {
  Rng rng(3);
  const State x = random_state(4, 3, 3, rng);
  const Partition partition = column_partition(4, 3);
  for (int t = 0; t < 500; ++t) {
    const State u = resample_auxiliary(x, partition, {2, 0, 4}, 0.3, 3, rng);
    EXPECT_LE(hamming_distance(BlockRef(u.col(0)), BlockRef(x.col(0))), 2);
    EXPECT_EQ(u.col(1), x.col(1));
    EXPECT_LT(u.maxCoeff(), 3);
  }
}

TEST(Auxiliary, UniformOverBall) {
  Rng rng(8);
  const State x = State::Zero(4, 1);
  const Partition partition = column_partition(4, 1);
  std::map<std::vector<int>, double> counts;
  const int draws = 33000;
  for (int t = 0; t < draws; ++t) {
    const State u = resample_auxiliary(x, partition, {2}, 0.0, 3, rng);
    counts[std::vector<int>(u.data(), u.data() + 4)] += 1.0;
  }
  ASSERT_EQ(counts.size(), 33u);
  Eigen::VectorXd observed(33);
  int i = 0;
  for (const auto& [key, c] : counts) observed(i++) = c;
  EXPECT_GT(chi_square_p_value(Eigen::VectorXd::Constant(33, 1.0 / 33), observed), 1e-4);
}

TEST(RadiusVector, GibbsMimicPicksOneFullBlock) {
  BallSpec spec;
  spec.distribution = RadiusDistribution::kGibbsMimic;
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::vector<int> r = draw_radius_vector(spec, {2, 3, 1}, rng);
    int full = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] == 0) continue;
      EXPECT_EQ(r[i], std::vector<int>({2, 3, 1})[i]);
      ++full;
    }
    EXPECT_EQ(full, 1);
  }
}

TEST(BallSpec, ErgodicityFlag) {
  BallSpec spec;
  spec.radii = {0, 0};
  EXPECT_FALSE(spec.ergodic());
  spec.radii = {0, 1};
  EXPECT_TRUE(spec.ergodic());
  spec.distribution = RadiusDistribution::kPerBlockCategorical;
  spec.radius_probs = {1.0};
  EXPECT_FALSE(spec.ergodic());
}

TEST(Normalizer, FactorizedMatchesBruteForce) {
  Rng rng(17);
  StencilCache stencils;
  for (int trial = 0; trial < 10; ++trial) {
    TableFactorModel model(3, 2, 3, rng);
    const ExactTable table = exact_posterior(model);
    const State u = random_state(3, 2, 3, rng);
    const std::vector<int> radii = {static_cast<int>(rng.uniform_int(4)),
                                    static_cast<int>(rng.uniform_int(4))};
    const double lambda = trial % 2 == 0 ? 0.0 : 0.6;
    const double got =
        hb_state_update_factorized(model, u, radii, lambda, nullptr, stencils).log_normalizer;
    const double want =
        brute_force_normalizer(model, table, u, column_partition(3, 2), radii, lambda);
    EXPECT_NEAR(got, want, 1e-10);
  }
}

TEST(Normalizer, ChainMatchesBruteForce) {
  Rng rng(23);
  StencilCache stencils;
  for (int trial = 0; trial < 20; ++trial) {
    const int s = 2 + static_cast<int>(rng.uniform_int(2));
    const Eigen::Index rows = 2 + rng.uniform_int(2);
    const Eigen::Index cols = 2 + rng.uniform_int(2);
    TableChainModel model(rows, cols, s, rng);
    const ExactTable table = exact_posterior(model);
    const State u = random_state(rows, cols, s, rng);
    std::vector<int> radii(cols);
    for (auto& r : radii) r = static_cast<int>(rng.uniform_int(rows + 1));
    const double lambda = trial % 3 == 0 ? 0.9 : 0.0;
    const double got =
        hb_state_update_chain(model, u, radii, lambda, nullptr, stencils).log_normalizer;
    const double want =
        brute_force_normalizer(model, table, u, column_partition(rows, cols), radii, lambda);
    EXPECT_NEAR(got, want, 1e-9);
  }
}

TEST(Normalizer, JointMatchesBruteForce) {
  StencilCache stencils;
  Rng rng(31);
  const RegressionModel model = testing::regression_toy(6, 25, 4);
  const ExactTable table = exact_posterior(model);
  for (int trial = 0; trial < 10; ++trial) {
    const State u = random_state(6, 1, 2, rng);
    const Partition partition = random_partition(6, 4, rng);
    const std::vector<int> radii = {1 + static_cast<int>(rng.uniform_int(3)), 1};
    const double got = hb_state_update_joint(model, u, partition, radii, 0.4, nullptr, stencils,
                                             1'000'000)
                           .log_normalizer;
    EXPECT_NEAR(got, brute_force_normalizer(model, table, u, partition, radii, 0.4), 1e-10);
  }
}

TEST(Normalizer, ChainSliceDrawsMatchRestrictedPosterior) {
  Rng rng(5);
  TableChainModel model(2, 3, 2, rng);
  const ExactTable table = exact_posterior(model);
  const State u = random_state(2, 3, 2, rng);
  const std::vector<int> radii = {1, 2, 1};
  StencilCache stencils;
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(table.size());
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    const State x = table.state(i);
    bool inside = true;
    for (Eigen::Index c = 0; c < 3; ++c)
      inside = inside && hamming_distance(BlockRef(x.col(c)), BlockRef(u.col(c))) <= radii[c];
    if (inside) expected(i) = table.probabilities()(i);
  }
  expected /= expected.sum();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(table.size());
  for (int t = 0; t < 40000; ++t) {
    counts(table.index(hb_state_update_chain(model, u, radii, 0.0, &rng, stencils).x)) += 1.0;
  }
  EXPECT_GT(chi_square_p_value(expected, counts), 1e-4);
}

struct KernelCase {
  std::string name;
  std::unique_ptr<ModelTarget> model;
  SamplerConfig config;
};

std::vector<KernelCase> kernel_cases() {
  Rng rng(77);
  std::vector<KernelCase> out;
  auto add = [&](const std::string& name, const ModelTarget& model, SamplerConfig config) {
    out.push_back({name, model.clone(), config});
  };
  const RegressionModel regression = testing::regression_toy(4, 20, 3);
  const TumorModel tumor = testing::tumor_toy();
  const FhmmModel fhmm = testing::fhmm_toy();
  const TableFactorModel factor(2, 2, 3, rng);
  const TableChainModel chain(2, 2, 3, rng);
  for (Scheme scheme : {Scheme::kHb, Scheme::kHbBlock, Scheme::kBlockGibbs, Scheme::kPureMh}) {
    const std::string s = to_string(scheme);
    add("regression/" + s, regression, make_config(scheme, 1, 2));
    add("regression-ragged/" + s, regression, make_config(scheme, 1, 3));
    add("tumor/" + s, tumor, make_config(scheme, 1));
    add("fhmm/" + s, fhmm, make_config(scheme, 1));
    add("factor/" + s, factor, make_config(scheme, 1));
    add("chain/" + s, chain, make_config(scheme, 1));
  }
  SamplerConfig weighted = make_config(Scheme::kHb, 1);
  weighted.ball.lambda = 0.7;
  add("chain/hb-lambda", chain, weighted);
  weighted.block_size = 2;
  add("regression/hb-lambda", regression, weighted);
  SamplerConfig weighted_block = make_config(Scheme::kHbBlock, 1, 2);
  weighted_block.ball.lambda = 1.1;
  add("factor/hb-block-lambda", factor, weighted_block);
  SamplerConfig categorical = make_config(Scheme::kHb, 1);
  categorical.ball.distribution = RadiusDistribution::kPerBlockCategorical;
  categorical.ball.radius_probs = {0.3, 0.4, 0.3};
  add("fhmm/hb-categorical", fhmm, categorical);
  SamplerConfig mimic = make_config(Scheme::kHb, 1);
  mimic.ball.distribution = RadiusDistribution::kGibbsMimic;
  add("factor/hb-mimic", factor, mimic);
  SamplerConfig rows = make_config(Scheme::kBlockGibbs, 1, 1);
  rows.axis = BlockAxis::kRows;
  add("fhmm/row-gibbs", fhmm, rows);
  return out;
}

// Engine transitions from a fixed state follow the oracle kernel row.
TEST(EngineVsOracle, OneStepTransitionsMatchExactKernel) {
  for (auto& kc : kernel_cases()) {
    const ExactTable table = exact_posterior(*kc.model);
    const Eigen::MatrixXd kernel = exact_kernel(kc.config, *kc.model, table);
    Sampler sampler(kc.config, *kc.model);
    Rng rng(1234);
    for (Eigen::Index start : {Eigen::Index{0}, table.size() / 2 + 1}) {
      Eigen::VectorXd counts = Eigen::VectorXd::Zero(table.size());
      for (int t = 0; t < 12000; ++t) {
        State x = table.state(start);
        sampler.step(x, rng);
        counts(table.index(x)) += 1.0;
      }
      EXPECT_GT(chi_square_p_value(kernel.row(start).transpose(), counts), 1e-5)
          << kc.name << " from state " << start;
    }
    EXPECT_EQ(sampler.counters().move_bound_violations, 0u) << kc.name;
  }
}

TEST(RunChain, SameSeedGivesIdenticalTraces) {
  const RegressionModel model = testing::regression_toy(8, 30, 6);
  SamplerConfig c = make_config(Scheme::kHbBlock, 1, 3);
  c.iterations = 500;
  c.record_time = false;
  RegressionModel a = model;
  RegressionModel b = model;
  Rng ra(99), rb(99);
  const Trace ta = run_chain(c, a, ra);
  const Trace tb = run_chain(c, b, rb);
  ASSERT_EQ(ta.records.size(), tb.records.size());
  for (std::size_t i = 0; i < ta.records.size(); ++i) {
    EXPECT_EQ(ta.records[i].log_joint, tb.records[i].log_joint);
    EXPECT_EQ(ta.records[i].active, tb.records[i].active);
    EXPECT_EQ(ta.records[i].elapsed_ms, 0.0);
  }
}

TEST(RunChain, EmptyTraceWhenEverythingIsBurnIn) {
  FlatModel model(3, 1, 2);
  SamplerConfig c = make_config(Scheme::kHb, 1, 1);
  c.iterations = 50;
  c.burnin = 50;
  Rng rng(1);
  EXPECT_TRUE(run_chain(c, model, rng).records.empty());
}

TEST(RunChain, ThinningAndDefaultBurnIn) {
  FlatModel model(3, 1, 2);
  SamplerConfig c = make_config(Scheme::kHb, 1, 1);
  c.iterations = 100;
  c.burnin = -1;
  c.thin = 3;
  Rng rng(1);
  const Trace t = run_chain(c, model, rng);
  EXPECT_EQ(t.records.size(), 30u);
  EXPECT_EQ(t.records.front().iteration, 12);
}

TEST(RunChain, BlockGibbsEqualsFullRadiusHbBlock) {
  const RegressionModel model = testing::regression_toy(9, 30, 2);
  SamplerConfig gibbs = make_config(Scheme::kBlockGibbs, 1, 2);
  gibbs.iterations = 300;
  gibbs.record_time = false;
  SamplerConfig hb = gibbs;
  hb.scheme = Scheme::kHbBlock;
  hb.ball.radii = {2};
  RegressionModel a = model;
  RegressionModel b = model;
  Rng ra(5), rb(5);
  const Trace ta = run_chain(gibbs, a, ra);
  const Trace tb = run_chain(hb, b, rb);
  ASSERT_EQ(ta.records.size(), tb.records.size());
  for (std::size_t i = 0; i < ta.records.size(); ++i)
    ASSERT_EQ(ta.records[i].active, tb.records[i].active) << i;
}

TEST(RunChain, CandidateEvaluationsPerSweepEqualBallVolumeTimesBlocks) {
  RegressionModel model = testing::regression_toy(20, 30, 8);
  SamplerConfig c = make_config(Scheme::kHbBlock, 1, 10);
  c.iterations = 40;
  Rng rng(3);
  Trace t = run_chain(c, model, rng);
  EXPECT_EQ(t.counters.candidate_evaluations, 40u * 11u * 2u);

  RegressionModel ragged = testing::regression_toy(25, 30, 8);
  t = run_chain(c, ragged, rng);
  EXPECT_EQ(t.counters.candidate_evaluations, 40u * (11u + 11u + 6u));
}

TEST(RunChain, MovesStayWithinBound) {
  FhmmModel model = testing::fhmm_toy(4, 30, 3);
  for (Scheme scheme : {Scheme::kHb, Scheme::kHbBlock, Scheme::kPureMh}) {
    SamplerConfig c = make_config(scheme, 2);
    c.iterations = 300;
    c.theta_update = ThetaUpdate::kConditional;
    Rng rng(4);
    const Trace t = run_chain(c, model, rng);
    EXPECT_EQ(t.counters.move_bound_violations, 0u);
    const int bound = scheme == Scheme::kPureMh ? 2 * 30 : 4 * 30;
    EXPECT_LE(t.counters.max_move, bound);
    EXPECT_GT(t.counters.max_move, 0);
  }
}

TEST(RunChain, LongRunMarginalsMatchOracle) {
  RegressionModel model = testing::regression_toy(10, 40, 12, 1.0);
  const Eigen::VectorXd exact = inclusion_probabilities(exact_posterior(model));
  SamplerConfig c = make_config(Scheme::kHb, 1, 5);
  c.iterations = 200000;
  c.burnin = 1000;
  c.record_time = false;
  Rng rng(2024);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(10);
  long n = 0;
  run_chain(c, model, rng, std::nullopt, [&](long, const State& x, const ModelTarget&) {
    sum += x.col(0).cast<double>();
    ++n;
  });
  EXPECT_LT((sum / static_cast<double>(n) - exact).cwiseAbs().maxCoeff(), 0.02);
}

TEST(RunChain, NumericalFailureReportsIteration) {
  class Degenerate final : public FactorizedTarget {
   public:
    std::unique_ptr<ModelTarget> clone() const override {
      return std::make_unique<Degenerate>(*this);
    }
    Eigen::Index rows() const override { return 2; }
    Eigen::Index cols() const override { return 2; }
    int alphabet_size() const override { return 2; }
    Eigen::VectorXd column_log_factors(Eigen::Index,
                                       const Eigen::MatrixXi& c) const override {
      return Eigen::VectorXd::Constant(c.cols(), kNegInf);
    }
    double log_constant() const override { return 0.0; }
  } model;
  SamplerConfig c = make_config(Scheme::kHb, 1);
  c.iterations = 10;
  Rng rng(1);
  try {
    run_chain(c, model, rng);
    FAIL() << "expected a numerical error";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 0"), std::string::npos) << e.what();
  }
}

TEST(Sampler, RejectsInvalidConfigurations) {
  RegressionModel regression = testing::regression_toy(6, 20, 1);
  SamplerConfig c = make_config(Scheme::kHbBlock, 1, 2);
  c.theta_update = ThetaUpdate::kJointMh;
  EXPECT_THROW(Sampler(c, regression), ConfigError);

  c = make_config(Scheme::kBlockGibbs, 1, 1);
  c.axis = BlockAxis::kRows;
  EXPECT_THROW(Sampler(c, regression), ConfigError);

  c = make_config(Scheme::kHb, 1, 3);
  c.ball.radii = {1, 4};
  EXPECT_THROW(Sampler(c, regression), ConfigError);

  RegressionModel wide = testing::regression_toy(60, 20, 1);
  c = make_config(Scheme::kHb, 1, 10);
  EXPECT_THROW(Sampler(c, wide), ConfigError);

  c = make_config(Scheme::kHb, 1, 1);
  c.thin = 0;
  EXPECT_THROW(Sampler(c, regression), ConfigError);
}

TEST(SchemeNames, RoundTrip) {
  for (Scheme s : {Scheme::kHb, Scheme::kHbBlock, Scheme::kBlockGibbs, Scheme::kPureMh})
    EXPECT_EQ(parse_scheme(to_string(s)), s);
  for (ThetaUpdate t : {ThetaUpdate::kConditional, ThetaUpdate::kJointMh, ThetaUpdate::kNone})
    EXPECT_EQ(parse_theta_update(to_string(t)), t);
  for (RadiusDistribution d : {RadiusDistribution::kFixed, RadiusDistribution::kPerBlockCategorical,
                               RadiusDistribution::kGibbsMimic})
    EXPECT_EQ(parse_radius_distribution(to_string(d)), d);
  EXPECT_THROW(parse_scheme("gibbs"), ConfigError);
}

TEST(JointMh, IdenticalProposalIsAlwaysAccepted) {
  FhmmModel model = testing::fhmm_toy();
  const LogRandomWalkProposal still({0}, 0.0);
  StencilCache stencils;
  Rng rng(6);
  const State u = State::Zero(2, 3);
  for (int t = 0; t < 50; ++t) {
    const JointMhResult r = theta_update_joint_mh(model, u, column_partition(2, 3), {1, 1, 1},
                                                  0.0, still, rng, stencils, 1'000'000);
    EXPECT_TRUE(r.accepted);
    EXPECT_NEAR(r.log_ratio, 0.0, 1e-12);
  }
}

TEST(JointMh, AcceptanceRateMatchesExactExpectation) {
  FhmmModel model = testing::fhmm_toy();
  const ExactTable table = exact_posterior(model);
  const State u = table.state(5);
  const std::vector<int> radii = {1, 1, 1};
  const double sigma2 = model.sigma2();
  const double scale = 0.6;
  // log sum over H_m(U) of p(y, X, sigma^2), by enumeration.
  auto log_z = [&](double s2) {
    FhmmModel m = model;
    m.set_sigma2(s2);
    return brute_force_normalizer(m, exact_posterior(m), u, column_partition(2, 3), radii, 0.0);
  };
  const double base = log_z(sigma2);
  // E_z min(1, ratio) with log sigma2' = log sigma2 + scale z; the log-scale
  // random walk has q ratio sigma2' / sigma2.
  double expected = 0.0;
  double weight = 0.0;
  for (int i = -400; i <= 400; ++i) {
    const double z = i * 0.02;
    const double w = std::exp(-0.5 * z * z);
    const double s2 = sigma2 * std::exp(scale * z);
    const double log_ratio = log_z(s2) - base + std::log(s2 / sigma2);
    expected += w * std::min(1.0, std::exp(log_ratio));
    weight += w;
  }
  expected /= weight;

  const LogRandomWalkProposal proposal({0}, scale);
  StencilCache stencils;
  Rng rng(10);
  int accepted = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    model.set_sigma2(sigma2);
    accepted += theta_update_joint_mh(model, u, column_partition(2, 3), radii, 0.0, proposal, rng,
                                      stencils, 1'000'000)
                    .accepted;
  }
  const double rate = static_cast<double>(accepted) / trials;
  EXPECT_NEAR(rate, expected, 4.0 * std::sqrt(expected * (1 - expected) / trials));
}

TEST(PureMh, ProposingCurrentStateIsAccepted) {
  // Zero radius proposes X itself.
  FhmmModel model = testing::fhmm_toy();
  StencilCache stencils;
  Rng rng(1);
  State x = State::Zero(2, 3);
  for (int t = 0; t < 20; ++t)
    EXPECT_TRUE(pure_mh_step(x, model, column_partition(2, 3), {0, 0, 0}, rng, stencils, 100));
}

TEST(PureMh, FlatTargetAlwaysAccepts) {
  FlatModel model(3, 2, 3);
  StencilCache stencils;
  Rng rng(1);
  State x = State::Zero(3, 2);
  for (int t = 0; t < 200; ++t)
    EXPECT_TRUE(pure_mh_step(x, model, column_partition(3, 2), {1, 2}, rng, stencils, 1000));
}

}  // namespace
}  // namespace hbs
