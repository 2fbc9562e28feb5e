#include <cmath>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>
#include <Eigen/Dense>

#include "fixtures.hpp"
#include "hbs/error.hpp"
#include "hbs/models/simulate.hpp"
#include "hbs/oracle.hpp"

namespace hbs {
namespace {

namespace bm = boost::math;

// ---------------------------------------------------------------- tumor

TEST(Tumor, AlleleFrequenciesOfKnownArchitectures) {
  for (const Architecture& a : {linear_architecture(), branched_architecture()}) {
    const Eigen::VectorXd phi = tumor_allele_frequencies(a.x, a.theta, 0.0);
    EXPECT_NEAR(phi(0), 0.5, 1e-15);
    EXPECT_NEAR(phi(1), 0.3, 1e-15);
    EXPECT_NEAR(phi(2), 0.15, 1e-15);
  }
  EXPECT_NEAR(linear_architecture().theta.maxCoeff(), 0.4, 1e-15);
  EXPECT_NEAR(branched_architecture().theta.maxCoeff(), 0.6, 1e-15);
  const Architecture a = linear_architecture();
  const Eigen::VectorXd phi = tumor_allele_frequencies(a.x, a.theta, 0.01);
  EXPECT_NEAR(phi(2), 0.99 * 0.15 + 0.01 * 0.85, 1e-15);
  EXPECT_THROW(tumor_allele_frequencies(a.x, Eigen::Vector3d(0.5, 0.5, 0.5), 0.0), ContractError);
}

TEST(Tumor, LogJointMatchesDistributionLibrary) {
  const TumorModel model = testing::tumor_toy();
  const TumorPrior& prior = model.prior();
  State x(2, 2);
  x << 1, 0,
       1, 1;
  const Eigen::VectorXd theta = model.weights();
  double want = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double p = 0.5 * theta.dot(x.col(i).cast<double>());
    const double phi = (1 - prior.error_rate) * p + prior.error_rate * (1 - p);
    want += std::log(bm::pdf(bm::binomial(model.data().depth(i), phi), model.data().reads(i)));
    for (int k = 0; k < 2; ++k)
      want += std::log(x(k, i) ? model.f()(i) : 1 - model.f()(i));
    want += std::log(bm::pdf(bm::beta_distribution<>(prior.f_alpha, prior.f_beta), model.f()(i)));
  }
  for (int k = 0; k < 2; ++k)
    want += std::log(bm::pdf(bm::gamma_distribution<>(prior.alpha / 2, 1.0), model.gamma()(k)));
  EXPECT_NEAR(model.log_joint(x), want, 1e-10);
  EXPECT_NEAR(tumor_log_joint(model.data(), prior, x, model.gamma(), model.f()), want, 1e-10);
}

TEST(Tumor, ZeroFrequencyIsRejected) {
  TumorData data;
  data.reads = Eigen::Vector2i(3, 4);
  data.depth = Eigen::Vector2i(10, 10);
  TumorPrior prior;
  prior.error_rate = 0.0;
  const Eigen::MatrixXi x = Eigen::MatrixXi::Zero(2, 2);
  EXPECT_THROW(tumor_log_joint(data, prior, x, Eigen::Vector2d(1, 1), Eigen::Vector2d(0.5, 0.5)),
               ContractError);
  EXPECT_THROW(TumorModel(data, 2, prior), ContractError);
}

TEST(Tumor, ColumnsFactorize) {
  const TumorModel model = testing::tumor_toy();
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    State x(2, 2);
    for (Eigen::Index i = 0; i < 4; ++i) x.data()[i] = static_cast<int>(rng.uniform_int(2));
    State y = x;
    y(rng.uniform_int(2), 1) ^= 1;
    const double diff = model.column_log_factors(1, Eigen::MatrixXi(y.col(1)))(0) -
                        model.column_log_factors(1, Eigen::MatrixXi(x.col(1)))(0);
    EXPECT_NEAR(model.log_joint(y) - model.log_joint(x), diff, 1e-12);
  }
}

TEST(Tumor, ColumnsFactorizeExhaustively) {
  TumorData data;
  data.reads = Eigen::Vector3i(510, 290, 160);
  data.depth = Eigen::Vector3i(1000, 1000, 1000);
  TumorModel model(data, 3);
  model.set_gamma(Eigen::Vector3d(0.7, 1.9, 0.4));
  model.set_f(Eigen::Vector3d(0.3, 0.5, 0.8));
  const ExactTable table(3, 3, 2);
  const ExactTable column(3, 1, 2);
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    const State x = table.state(i);
    for (Eigen::Index c = 0; c < 3; ++c) {
      const Eigen::VectorXd factors = model.column_log_factors(c, Eigen::MatrixXi(x.col(c)));
      for (Eigen::Index v = 0; v < column.size(); ++v) {
        State y = x;
        y.col(c) = column.state(v).col(0);
        const double diff =
            model.column_log_factors(c, Eigen::MatrixXi(y.col(c)))(0) - factors(0);
        ASSERT_NEAR(model.log_joint(y) - model.log_joint(x), diff, 1e-10);
      }
    }
    ASSERT_TRUE(std::isfinite(model.log_joint(x)));
  }
}

TEST(Tumor, BetaUpdateHasConjugateMoments) {
  TumorModel model = testing::tumor_toy();
  State x(2, 2);
  x << 1, 0,
       1, 0;
  Rng rng(3);
  double sum0 = 0, sum1 = 0, sq0 = 0;
  const int n = 40000;
  for (int t = 0; t < n; ++t) {
    model.update_f(x, rng);
    sum0 += model.f()(0);
    sq0 += model.f()(0) * model.f()(0);
    sum1 += model.f()(1);
  }
  // Beta(3, 1) and Beta(1, 3) under the uniform prior.
  EXPECT_NEAR(sum0 / n, 0.75, 0.005);
  EXPECT_NEAR(sum1 / n, 0.25, 0.005);
  EXPECT_NEAR(sq0 / n - (sum0 / n) * (sum0 / n), 3.0 / 80.0, 0.002);
}

TEST(Tumor, GammaChainMatchesQuadrature) {
  TumorModel model = testing::tumor_toy();
  State x(2, 2);
  x << 1, 0,
       0, 1;
  const double e = model.prior().error_rate;
  const double shape = model.prior().alpha / 2;
  // Given X, theta_1 = gamma_1 / (gamma_1 + gamma_2) ~ Beta(shape, shape) a
  // priori, and the reads only depend on theta.
  auto density = [&](double t) {
    double logp = (shape - 1) * std::log(t) + (shape - 1) * std::log1p(-t);
    const double phis[2] = {(1 - e) * t / 2 + e * (1 - t / 2),
                            (1 - e) * (1 - t) / 2 + e * (1 - (1 - t) / 2)};
    for (int i = 0; i < 2; ++i) {
      const int r = model.data().reads(i);
      const int d = model.data().depth(i);
      logp += r * std::log(phis[i]) + (d - r) * std::log1p(-phis[i]);
    }
    return std::exp(logp + 120.0);
  };
  bm::quadrature::tanh_sinh<double> integrator;
  const double z = integrator.integrate(density, 0.0, 1.0);
  const double mean =
      integrator.integrate([&](double t) { return t * density(t); }, 0.0, 1.0) / z;

  Rng rng(11);
  double sum = 0;
  const int n = 200000;
  for (int t = 0; t < 2000; ++t) model.update_gamma(x, rng);
  for (int t = 0; t < n; ++t) {
    model.update_gamma(x, rng);
    sum += model.weights()(0);
  }
  EXPECT_NEAR(sum / n, mean, 0.005);
}

TEST(Tumor, ParametersRoundTrip) {
  TumorModel model = testing::tumor_toy();
  const Eigen::VectorXd theta = model.parameters();
  ASSERT_EQ(theta.size(), 4);
  EXPECT_EQ(model.parameter_names()[0], "gamma_1");
  EXPECT_EQ(model.parameter_names()[3], "f_2");
  Eigen::VectorXd other = theta;
  other(0) = 2.5;
  model.set_parameters(other);
  EXPECT_EQ(model.gamma()(0), 2.5);
}

// ---------------------------------------------------------------- regression

// log of y's marginal density (up to constants common to all active sets)
// obtained by integrating sigma^2 numerically against an explicit covariance.
double regression_quadrature(const RegressionModel& model, const std::vector<Eigen::Index>& active) {
  const Eigen::VectorXd& y = model.y();
  const Eigen::Index n = y.size();
  const Eigen::Index d = model.design().cols();
  const double g = model.g();
  const RegressionPrior& prior = model.prior();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(n, n);
  if (!active.empty()) {
    Eigen::MatrixXd za(n, active.size());
    for (std::size_t j = 0; j < active.size(); ++j) za.col(j) = model.design().col(active[j]);
    const Eigen::MatrixXd proj = za * (za.transpose() * za).inverse() * za.transpose();
    cov += g * proj;
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const double quad = y.dot(ldlt.solve(y));
  const double log_det = ldlt.vectorD().array().log().sum();
  const double eff = static_cast<double>(n - 1);
  const bm::inverse_gamma_distribution<> sigma_prior(prior.a_sigma, prior.b_sigma);
  auto integrand = [&](double s2) {
    const double loglik = -0.5 * eff * std::log(s2) - 0.5 * log_det - quad / (2 * s2);
    return std::exp(loglik + 40.0) * bm::pdf(sigma_prior, s2);
  };
  bm::quadrature::tanh_sinh<double> integrator;
  const double mass = integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
  const double k = static_cast<double>(active.size());
  const double log_prior = std::log(bm::beta(k + prior.a_pi, d - k + prior.b_pi));
  return std::log(mass) + log_prior;
}

TEST(Regression, MarginalDifferencesMatchQuadrature) {
  RegressionPrior prior;
  prior.a_sigma = 2.0;
  prior.b_sigma = 1.0;
  prior.a_pi = 1.0;
  Rng rng(4);
  Eigen::MatrixXd z(15, 4);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  Eigen::VectorXd y = 0.9 * z.col(2) - 0.4 * z.col(0);
  for (Eigen::Index i = 0; i < 15; ++i) y(i) += 0.8 * rng.normal();
  const RegressionModel model(y, z, prior);
  const std::vector<std::vector<Eigen::Index>> sets = {{}, {2}, {0, 2}, {1, 3}, {0, 1, 2, 3}};
  const double base_model = model.log_marginal(sets[0]);
  const double base_oracle = regression_quadrature(model, sets[0]);
  for (const auto& s : sets) {
    EXPECT_NEAR(model.log_marginal(s) - base_model, regression_quadrature(model, s) - base_oracle,
                1e-4);
  }
}

TEST(Regression, InvariantToColumnPermutation) {
  Rng rng(8);
  Eigen::MatrixXd z(20, 5);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  Eigen::VectorXd y = z.col(1) + 0.5 * Eigen::VectorXd::Ones(20);
  for (Eigen::Index i = 0; i < 20; ++i) y(i) += rng.normal();
  const Eigen::VectorXi order = Eigen::Vector<int, 5>(3, 0, 4, 1, 2);
  Eigen::MatrixXd zp(20, 5);
  for (int j = 0; j < 5; ++j) zp.col(j) = z.col(order(j));
  const RegressionModel a(y, z);
  const RegressionModel b(y, zp);
  for (int t = 0; t < 20; ++t) {
    State x(5, 1);
    for (int j = 0; j < 5; ++j) x(j) = static_cast<int>(rng.uniform_int(2));
    State xp(5, 1);
    for (int j = 0; j < 5; ++j) xp(j) = x(order(j));
    EXPECT_NEAR(a.log_joint(x), b.log_joint(xp), 1e-9);
  }
}

TEST(Regression, RedundantColumnCostsOnlyThePriorPenalty) {
  const RegressionModel model = testing::regression_toy(6, 30, 2);
  const RegressionPrior& p = model.prior();
  const double d = 6;
  for (const std::vector<Eigen::Index>& base :
       {std::vector<Eigen::Index>{0}, std::vector<Eigen::Index>{0, 5}}) {
    std::vector<Eigen::Index> bigger = base;
    bigger.push_back(1);  // identical to column 0
    const double k = static_cast<double>(base.size());
    const double penalty = -0.5 * std::log1p(model.g()) + std::log(k + p.a_pi) -
                           std::log(d - k - 1 + p.b_pi);
    EXPECT_NEAR(model.log_marginal(bigger) - model.log_marginal(base), penalty, 1e-8);
    EXPECT_LT(penalty, 0.0);
  }
  EXPECT_NEAR(model.residual_sum({0, 1}), model.residual_sum({0}), 1e-9);
}

TEST(Regression, OrthogonalColumnLowersTheMarginal) {
  Rng rng(12);
  Eigen::MatrixXd z(25, 3);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  Eigen::VectorXd y = z.col(0);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.3 * rng.normal();
  y.array() -= y.mean();
  // Columns 1 and 2 carry nothing about y beyond column 0.
  for (Eigen::Index j : {1, 2}) {
    Eigen::MatrixXd basis(25, 2);
    basis << y, z.col(0);
    const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(z.col(j));
    z.col(j) -= basis * coef;
  }
  const RegressionModel model(y, z);
  EXPECT_LT(model.log_marginal({0, 1}), model.log_marginal({0}));
  EXPECT_LT(model.log_marginal({0, 2}), model.log_marginal({0}));
  EXPECT_LT(model.log_marginal({1}), model.log_marginal({}));
}

TEST(Regression, ResidualSumShrinksWithMoreColumns) {
  const RegressionModel model = testing::regression_toy(6, 30, 3);
  std::vector<Eigen::Index> active;
  double previous = model.residual_sum(active);
  EXPECT_NEAR(previous, model.y().squaredNorm(), 1e-9);
  for (Eigen::Index j : {5, 2, 0, 3}) {
    active.push_back(j);
    const double s = model.residual_sum(active);
    EXPECT_LE(s, previous + 1e-9);
    previous = s;
  }
}

TEST(Regression, BlockScoresDifferLikeLogJoint) {
  const RegressionModel model = testing::regression_toy(7, 25, 6);
  State x = State::Zero(7, 1);
  x(0) = 1;
  x(4) = 1;
  const Indices block = {4, 2, 6};
  Eigen::MatrixXi candidates(3, 4);
  candidates << 0, 1, 1, 0,
                0, 0, 1, 1,
                1, 0, 1, 1;
  const Eigen::VectorXd scores = model.block_scores(x, block, candidates);
  for (Eigen::Index j = 1; j < 4; ++j) {
    State a = x, b = x;
    scatter(a, block, candidates.col(j));
    scatter(b, block, candidates.col(0));
    EXPECT_NEAR(scores(j) - scores(0), model.log_joint(a) - model.log_joint(b), 1e-10);
  }
  EXPECT_THROW(model.log_marginal({1, 1}), ContractError);
}

TEST(Regression, YIsCentered) {
  const RegressionModel model = testing::regression_toy(3, 10, 1);
  EXPECT_NEAR(model.y().sum(), 0.0, 1e-12);
}

// ---------------------------------------------------------------- fhmm

double fhmm_dense_log_joint(const FhmmModel& model, const State& x) {
  const FhmmSpec& spec = model.spec();
  const double sd = std::sqrt(model.sigma2());
  double total = std::log(bm::pdf(bm::inverse_gamma_distribution<>(spec.a0, spec.b0),
                                  model.sigma2()));
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    const Eigen::VectorXd mean = spec.features * x.col(t).cast<double>();
    for (Eigen::Index l = 0; l < mean.size(); ++l)
      total += std::log(bm::pdf(bm::normal(mean(l), sd), model.y()(l, t)));
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      if (t == 0) {
        total += std::log(x(k, 0) ? spec.initial(k) : 1 - spec.initial(k));
      } else {
        total += std::log(x(k, t) != x(k, t - 1) ? spec.flip(k) : 1 - spec.flip(k));
      }
    }
  }
  return total;
}

TEST(Fhmm, LogJointMatchesDenseComputation) {
  FhmmModel model = testing::fhmm_toy(3, 4, 9);
  model.set_sigma2(0.35);
  Rng rng(1);
  for (int t = 0; t < 30; ++t) {
    State x(3, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<int>(rng.uniform_int(2));
    EXPECT_NEAR(model.log_joint(x), fhmm_dense_log_joint(model, x), 1e-10);
  }
}

TEST(Fhmm, PathFactorsSumToLogJoint) {
  FhmmModel model = testing::fhmm_toy(3, 6, 21);
  model.set_sigma2(0.6);
  const FhmmSpec& spec = model.spec();
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    State x(3, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<int>(rng.uniform_int(2));
    double total = std::log(bm::pdf(bm::inverse_gamma_distribution<>(spec.a0, spec.b0), 0.6)) +
                   model.log_initial(Eigen::MatrixXi(x.col(0)))(0);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      total += model.column_loglik(c, x.col(c));
      if (c > 0) total += model.transition_logprob(x.col(c - 1), x.col(c));
    }
    EXPECT_NEAR(model.log_joint(x), total, 1e-12 * std::abs(total) + 1e-12);
  }
}

TEST(Fhmm, SigmaRateScalesWithResiduals) {
  FhmmSpec spec;
  spec.features = Eigen::MatrixXd::Ones(1, 1);
  spec.flip = Eigen::VectorXd::Constant(1, 0.1);
  spec.initial = Eigen::VectorXd::Constant(1, 0.5);
  Rng rng(9);
  Eigen::MatrixXd residual(1, 30);
  for (Eigen::Index i = 0; i < residual.size(); ++i) residual.data()[i] = rng.normal();
  const State x = State::Ones(1, 30);
  const Eigen::MatrixXd mean = Eigen::MatrixXd::Ones(1, 30);
  const FhmmModel exact(mean, spec);
  EXPECT_DOUBLE_EQ(exact.sigma2_posterior(x).first, spec.a0 + 15.0);
  EXPECT_DOUBLE_EQ(exact.sigma2_posterior(x).second, spec.b0);
  const double base = FhmmModel(mean + residual, spec).sigma2_posterior(x).second - spec.b0;
  for (double c : {0.5, 3.0}) {
    const double scaled =
        FhmmModel(mean + c * residual, spec).sigma2_posterior(x).second - spec.b0;
    EXPECT_NEAR(scaled, c * c * base, 1e-12 * scaled);
  }
}

TEST(Fhmm, TransitionsFromEachStateSumToOne) {
  const FhmmModel model = testing::fhmm_toy(3, 2, 4);
  const ExactTable column(3, 1, 2);
  Eigen::MatrixXi all(3, column.size());
  for (Eigen::Index i = 0; i < column.size(); ++i) all.col(i) = column.state(i).col(0);
  const Eigen::MatrixXd logp = model.log_transitions(all, all);
  for (Eigen::Index a = 0; a < all.cols(); ++a)
    EXPECT_NEAR(logp.row(a).array().exp().sum(), 1.0, 1e-12);
  EXPECT_NEAR(model.log_initial(all).array().exp().sum(), 1.0, 1e-12);
}

TEST(Fhmm, SigmaPosteriorMoments) {
  FhmmModel model = testing::fhmm_toy(2, 40, 3);
  State x = State::Zero(2, 40);
  x.row(0).head(20).setOnes();
  double rss = 0.0;
  for (Eigen::Index t = 0; t < 40; ++t)
    rss += (model.y().col(t) - model.spec().features * x.col(t).cast<double>()).squaredNorm();
  const auto [shape, rate] = model.sigma2_posterior(x);
  EXPECT_NEAR(shape, model.spec().a0 + 40.0, 1e-12);
  EXPECT_NEAR(rate, model.spec().b0 + rss / 2, 1e-9);

  Rng rng(6);
  double sum = 0.0;
  const int n = 50000;
  for (int t = 0; t < n; ++t) {
    model.update_parameters(x, rng);
    sum += model.sigma2();
  }
  const double mean = rate / (shape - 1);
  const double sd = mean / std::sqrt(shape - 2);
  EXPECT_NEAR(sum / n, mean, 5 * sd / std::sqrt(n));
}

TEST(Fhmm, RejectsMismatchedSpec) {
  FhmmSpec spec;
  spec.features = Eigen::MatrixXd::Ones(2, 3);
  spec.flip = Eigen::VectorXd::Constant(2, 0.1);
  spec.initial = Eigen::VectorXd::Constant(3, 0.5);
  EXPECT_THROW(FhmmModel(Eigen::MatrixXd::Zero(2, 4), spec), ContractError);
}

// ---------------------------------------------------------------- simulation

TEST(Simulate, TumorReadsFollowFrequencies) {
  Rng rng(5);
  TumorSimParams params;
  params.copies = 400;
  const TumorDataset ds = simulate_tumor(params, rng);
  ASSERT_EQ(ds.data.reads.size(), 1200);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < 1200; ++i) {
    EXPECT_LE(ds.data.reads(i), 1000);
    mean(i % 3) += ds.data.reads(i) / 400.0 / 1000.0;
  }
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(mean(j), ds.phi(j), 0.003);
}

TEST(Simulate, RegressionHasStandardizedDuplicatedColumns) {
  Rng rng(6);
  RegressionSimParams params;
  params.d = 50;
  params.confounder = 3;
  params.duplicate = 30;
  const RegressionDataset ds = simulate_regression(params, rng);
  ASSERT_EQ(ds.z.cols(), 50);
  for (Eigen::Index j = 0; j < 50; ++j) {
    EXPECT_NEAR(ds.z.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR(ds.z.col(j).squaredNorm() / (params.n - 1), 1.0, 1e-10);
  }
  EXPECT_EQ(ds.z.col(3), ds.z.col(30));
  const double noise = (ds.y - ds.z.col(3)).squaredNorm() / params.n;
  EXPECT_NEAR(noise, 0.2, 0.1);
}

TEST(Simulate, FhmmShapesAndNoiseLevel) {
  Rng rng(7);
  FhmmSimParams params;
  params.n = 2000;
  params.k = 4;
  const FhmmDataset ds = simulate_fhmm(params, rng);
  ASSERT_EQ(ds.y.cols(), 2000);
  ASSERT_EQ(ds.x.rows(), 4);
  const Eigen::MatrixXd resid = ds.y - ds.spec.features * ds.x.cast<double>();
  EXPECT_NEAR(resid.squaredNorm() / resid.size(), 0.01, 0.001);
  int flips = 0;
  for (Eigen::Index t = 1; t < 2000; ++t) flips += (ds.x.col(t) - ds.x.col(t - 1)).cwiseAbs().sum();
  EXPECT_NEAR(flips / (4.0 * 1999), 0.05, 0.01);
}

TEST(Simulate, UnknownExperimentIsRejected) {
  Rng rng(1);
  EXPECT_THROW(simulate_experiment("ising", {}, rng), ContractError);
  EXPECT_TRUE(std::holds_alternative<TumorDataset>(simulate_experiment("tumor", {}, rng)));
}

}  // namespace
}  // namespace hbs
