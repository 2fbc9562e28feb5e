#include "hbs/models/tumor.hpp"

#include <cmath>

#include "hbs/error.hpp"
#include "hbs/numeric.hpp"

namespace hbs {

namespace {

double log_gamma_density(double x, double shape) {
  return (shape - 1.0) * std::log(x) - x - std::lgamma(shape);
}

double log_beta_density(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - std::lgamma(a) -
         std::lgamma(b) + std::lgamma(a + b);
}

// phi for each candidate column (K x M) given weights theta.
Eigen::VectorXd candidate_frequencies(const Eigen::MatrixXi& candidates,
                                      const Eigen::VectorXd& theta, double e) {
  const Eigen::VectorXd p = 0.5 * (candidates.cast<double>().transpose() * theta);
  return ((1.0 - e) * p.array() + e * (1.0 - p.array())).matrix();
}

double binomial_log_pmf(int r, int d, double phi, double log_coef) {
  if (!(phi > 0.0 && phi < 1.0)) {
    throw ContractError("allele frequency phi outside (0, 1); use a positive error rate");
  }
  return log_coef + r * std::log(phi) + (d - r) * std::log1p(-phi);
}

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void check_data(const TumorData& data) {
  HBS_REQUIRE(data.reads.size() == data.depth.size(), "reads and depth differ in length");
  for (Eigen::Index i = 0; i < data.reads.size(); ++i) {
    HBS_REQUIRE(data.reads(i) >= 0 && data.reads(i) <= data.depth(i),
                "need 0 <= r_i <= d_i at every mutation");
  }
}

}  // namespace

Eigen::VectorXd tumor_allele_frequencies(const Eigen::MatrixXi& x, const Eigen::VectorXd& theta,
                                         double error_rate) {
  HBS_REQUIRE(x.rows() == theta.size(), "theta needs one weight per clone (row of X)");
  HBS_REQUIRE(error_rate >= 0.0 && error_rate < 1.0, "error rate must lie in [0, 1)");
  HBS_REQUIRE(theta.minCoeff() >= 0.0 && std::abs(theta.sum() - 1.0) < 1e-9,
              "theta must lie on the simplex");
  return candidate_frequencies(x, theta, error_rate);
}

double tumor_log_joint(const TumorData& data, const TumorPrior& prior, const Eigen::MatrixXi& x,
                       const Eigen::VectorXd& gamma, const Eigen::VectorXd& f) {
  check_data(data);
  const Eigen::Index k = x.rows();
  const Eigen::Index n = x.cols();
  HBS_REQUIRE(n == data.reads.size() && gamma.size() == k && f.size() == n,
              "tumor_log_joint: inconsistent dimensions");
  HBS_REQUIRE(gamma.minCoeff() > 0.0, "gamma must be positive");
  HBS_REQUIRE(f.minCoeff() > 0.0 && f.maxCoeff() < 1.0, "f must lie in (0, 1)");
  const Eigen::VectorXd phi = tumor_allele_frequencies(x, gamma / gamma.sum(), prior.error_rate);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    total += binomial_log_pmf(data.reads(i), data.depth(i), phi(i),
                              log_choose(data.depth(i), data.reads(i)));
    const int ones = x.col(i).sum();
    total += ones * std::log(f(i)) + (k - ones) * std::log1p(-f(i));
    total += log_beta_density(f(i), prior.f_alpha, prior.f_beta);
  }
  for (Eigen::Index j = 0; j < k; ++j) total += log_gamma_density(gamma(j), prior.alpha / k);
  return total;
}

TumorModel::TumorModel(TumorData data, int clones, TumorPrior prior)
    : data_(std::move(data)), clones_(clones), prior_(prior) {
  check_data(data_);
  HBS_REQUIRE(clones >= 1, "need at least one clone slot");
  HBS_REQUIRE(prior_.error_rate > 0.0 && prior_.error_rate < 1.0,
              "sequencing error rate must lie in (0, 1)");
  HBS_REQUIRE(prior_.alpha > 0.0 && prior_.f_alpha > 0.0 && prior_.f_beta > 0.0,
              "tumor hyperparameters must be positive");
  gamma_ = Eigen::VectorXd::Ones(clones);
  f_ = Eigen::VectorXd::Constant(data_.reads.size(), 0.5);
  log_binom_coef_.resize(data_.reads.size());
  for (Eigen::Index i = 0; i < data_.reads.size(); ++i) {
    log_binom_coef_(i) = log_choose(data_.depth(i), data_.reads(i));
  }
}

std::unique_ptr<ModelTarget> TumorModel::clone() const {
  return std::make_unique<TumorModel>(*this);
}

Eigen::VectorXd TumorModel::column_log_factors(Eigen::Index col,
                                               const Eigen::MatrixXi& candidates) const {
  const Eigen::VectorXd phi =
      candidate_frequencies(candidates, weights(), prior_.error_rate);
  const double log_f = std::log(f_(col));
  const double log_1mf = std::log1p(-f_(col));
  Eigen::VectorXd out(candidates.cols());
  for (Eigen::Index j = 0; j < candidates.cols(); ++j) {
    const int ones = candidates.col(j).sum();
    out(j) = binomial_log_pmf(data_.reads(col), data_.depth(col), phi(j), log_binom_coef_(col)) +
             ones * log_f + (clones_ - ones) * log_1mf;
  }
  return out;
}

double TumorModel::log_constant() const {
  double total = 0.0;
  for (Eigen::Index k = 0; k < gamma_.size(); ++k) {
    total += log_gamma_density(gamma_(k), prior_.alpha / clones_);
  }
  for (Eigen::Index i = 0; i < f_.size(); ++i) {
    total += log_beta_density(f_(i), prior_.f_alpha, prior_.f_beta);
  }
  return total;
}

Eigen::VectorXd TumorModel::parameters() const {
  Eigen::VectorXd theta(gamma_.size() + f_.size());
  theta << gamma_, f_;
  return theta;
}

std::vector<std::string> TumorModel::parameter_names() const {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < gamma_.size(); ++k) names.push_back("gamma_" + std::to_string(k + 1));
  for (Eigen::Index i = 0; i < f_.size(); ++i) names.push_back("f_" + std::to_string(i + 1));
  return names;
}

void TumorModel::set_parameters(const Eigen::VectorXd& theta) {
  HBS_REQUIRE(theta.size() == gamma_.size() + f_.size(), "tumor parameter vector has wrong size");
  set_gamma(theta.head(gamma_.size()));
  set_f(theta.tail(f_.size()));
}

void TumorModel::set_gamma(const Eigen::VectorXd& gamma) {
  HBS_REQUIRE(gamma.size() == clones_ && gamma.minCoeff() > 0.0, "gamma must be K positive values");
  gamma_ = gamma;
}

void TumorModel::set_f(const Eigen::VectorXd& f) {
  HBS_REQUIRE(f.size() == f_.size() && f.minCoeff() > 0.0 && f.maxCoeff() < 1.0,
              "f must be N values in (0, 1)");
  f_ = f;
}

double TumorModel::read_log_likelihood(const State& x, const Eigen::VectorXd& gamma) const {
  const Eigen::VectorXd phi = candidate_frequencies(x, gamma / gamma.sum(), prior_.error_rate);
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    total += binomial_log_pmf(data_.reads(i), data_.depth(i), phi(i), log_binom_coef_(i));
  }
  return total;
}

int TumorModel::update_gamma(const State& x, Rng& rng) {
  const double shape = prior_.alpha / clones_;
  int accepted = 0;
  double current = read_log_likelihood(x, gamma_);
  for (Eigen::Index k = 0; k < gamma_.size(); ++k) {
    Eigen::VectorXd proposed = gamma_;
    proposed(k) = gamma_(k) * std::exp(rng.normal(0.0, prior_.proposal_scale));
    if (!(proposed(k) > 0.0) || !std::isfinite(proposed(k))) continue;
    const double candidate = read_log_likelihood(x, proposed);
    // Target in log(gamma_k): likelihood x Gamma prior x Jacobian gamma_k.
    const double log_ratio = candidate + log_gamma_density(proposed(k), shape) +
                             std::log(proposed(k)) - current -
                             log_gamma_density(gamma_(k), shape) - std::log(gamma_(k));
    if (std::log(rng.uniform()) < log_ratio) {
      gamma_ = std::move(proposed);
      current = candidate;
      ++accepted;
    }
  }
  return accepted;
}

void TumorModel::update_f(const State& x, Rng& rng) {
  for (Eigen::Index i = 0; i < f_.size(); ++i) {
    const int ones = x.col(i).sum();
    double draw = rng.beta(prior_.f_alpha + ones, prior_.f_beta + clones_ - ones);
    // Keep the draw strictly inside (0, 1) so the Bernoulli terms stay finite.
    f_(i) = std::clamp(draw, 1e-300, 1.0 - 1e-16);
  }
}

void TumorModel::update_parameters(const State& x, Rng& rng) {
  update_gamma(x, rng);
  update_f(x, rng);
}

void TumorModel::update_unproposed_parameters(const State& x, Rng& rng) { update_f(x, rng); }

std::unique_ptr<ParameterProposal> TumorModel::joint_proposal() const {
  std::vector<Eigen::Index> moved(clones_);
  for (int k = 0; k < clones_; ++k) moved[k] = k;
  auto walk = std::make_unique<LogRandomWalkProposal>(moved, prior_.proposal_scale);
  if (prior_.random_walk_weight >= 1.0) return walk;
  auto jump = std::make_unique<GammaIndependenceProposal>(
      moved, Eigen::VectorXd::Constant(clones_, prior_.independence_shape));
  return std::make_unique<MixtureProposal>(prior_.random_walk_weight, std::move(walk),
                                           std::move(jump));
}

}  // namespace hbs
