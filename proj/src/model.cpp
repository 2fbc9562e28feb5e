#include "hbs/model.hpp"

#include <cmath>
#include <numbers>

#include "hbs/error.hpp"
#include "hbs/numeric.hpp"

namespace hbs {

namespace {

bool untouched_equal(const Eigen::VectorXd& to, const Eigen::VectorXd& from,
                     const std::vector<Eigen::Index>& moved) {
  if (to.size() != from.size()) return false;
  std::vector<char> is_moved(to.size(), 0);
  for (Eigen::Index k : moved) is_moved[k] = 1;
  for (Eigen::Index k = 0; k < to.size(); ++k)
    if (!is_moved[k] && to(k) != from(k)) return false;
  return true;
}

}  // namespace

LogRandomWalkProposal::LogRandomWalkProposal(std::vector<Eigen::Index> moved, double scale)
    : moved_(std::move(moved)), scale_(scale) {
  HBS_REQUIRE(scale >= 0.0, "random-walk scale must be nonnegative");
}

Eigen::VectorXd LogRandomWalkProposal::propose(const Eigen::VectorXd& from, Rng& rng) const {
  Eigen::VectorXd to = from;
  if (scale_ == 0.0) return to;
  for (Eigen::Index k : moved_) to(k) = from(k) * std::exp(rng.normal(0.0, scale_));
  return to;
}

double LogRandomWalkProposal::log_density(const Eigen::VectorXd& to,
                                          const Eigen::VectorXd& from) const {
  if (!untouched_equal(to, from, moved_)) return kNegInf;
  if (scale_ == 0.0) return to == from ? 0.0 : kNegInf;
  double lp = 0.0;
  for (Eigen::Index k : moved_) {
    if (!(to(k) > 0.0) || !(from(k) > 0.0)) return kNegInf;
    const double z = (std::log(to(k)) - std::log(from(k))) / scale_;
    lp += -0.5 * z * z - std::log(scale_ * std::sqrt(2.0 * std::numbers::pi)) - std::log(to(k));
  }
  return lp;
}

GammaIndependenceProposal::GammaIndependenceProposal(std::vector<Eigen::Index> moved,
                                                     Eigen::VectorXd shapes)
    : moved_(std::move(moved)), shapes_(std::move(shapes)) {
  HBS_REQUIRE(static_cast<Eigen::Index>(moved_.size()) == shapes_.size(),
              "one Gamma shape per proposed coordinate");
  HBS_REQUIRE(shapes_.size() == 0 || shapes_.minCoeff() > 0.0, "Gamma shapes must be positive");
}

Eigen::VectorXd GammaIndependenceProposal::propose(const Eigen::VectorXd& from,
                                                   Rng& rng) const {
  Eigen::VectorXd to = from;
  for (std::size_t t = 0; t < moved_.size(); ++t) {
    // Tiny shapes can underflow to zero, which is outside the support.
    double g = 0.0;
    while (!(g > 0.0)) g = rng.gamma(shapes_(t));
    to(moved_[t]) = g;
  }
  return to;
}

double GammaIndependenceProposal::log_density(const Eigen::VectorXd& to,
                                              const Eigen::VectorXd& from) const {
  if (!untouched_equal(to, from, moved_)) return kNegInf;
  double lp = 0.0;
  for (std::size_t t = 0; t < moved_.size(); ++t) {
    const double v = to(moved_[t]);
    if (!(v > 0.0)) return kNegInf;
    lp += (shapes_(t) - 1.0) * std::log(v) - v - std::lgamma(shapes_(t));
  }
  return lp;
}

MixtureProposal::MixtureProposal(double weight, std::unique_ptr<ParameterProposal> first,
                                 std::unique_ptr<ParameterProposal> second)
    : weight_(weight), first_(std::move(first)), second_(std::move(second)) {
  HBS_REQUIRE(weight >= 0.0 && weight <= 1.0, "mixture weight must lie in [0, 1]");
}

Eigen::VectorXd MixtureProposal::propose(const Eigen::VectorXd& from, Rng& rng) const {
  return rng.uniform() < weight_ ? first_->propose(from, rng) : second_->propose(from, rng);
}

double MixtureProposal::log_density(const Eigen::VectorXd& to,
                                    const Eigen::VectorXd& from) const {
  Eigen::Vector2d terms(std::log(weight_) + first_->log_density(to, from),
                        std::log1p(-weight_) + second_->log_density(to, from));
  return log_sum_exp(terms);
}

Eigen::VectorXd ModelTarget::block_scores(const State& x, const Indices& block,
                                          const Eigen::MatrixXi& candidates) const {
  State work = x;
  Eigen::VectorXd out(candidates.cols());
  for (Eigen::Index j = 0; j < candidates.cols(); ++j) {
    scatter(work, block, candidates.col(j));
    out(j) = log_joint(work);
  }
  return out;
}

double ModelTarget::block_score(const State& x, const Indices& block,
                                const BlockRef& candidate) const {
  return block_scores(x, block, Eigen::MatrixXi(candidate))(0);
}

double FactorizedTarget::log_joint(const State& x) const {
  double total = log_constant();
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    total += column_log_factors(c, Eigen::MatrixXi(x.col(c)))(0);
  }
  return total;
}

Eigen::VectorXd FactorizedTarget::block_scores(const State& x, const Indices& block,
                                               const Eigen::MatrixXi& candidates) const {
  const Eigen::Index col = block_as_column(block, x.rows());
  if (col < 0) return ModelTarget::block_scores(x, block, candidates);
  return column_log_factors(col, candidates);
}

double ChainTarget::log_joint(const State& x) const {
  HBS_REQUIRE(x.cols() >= 1, "chain state needs at least one column");
  Eigen::MatrixXi prev = x.col(0);
  double total = log_constant() + log_initial(prev)(0) + column_log_emissions(0, prev)(0);
  for (Eigen::Index c = 1; c < x.cols(); ++c) {
    Eigen::MatrixXi cur = x.col(c);
    total += log_transitions(prev, cur)(0, 0) + column_log_emissions(c, cur)(0);
    prev = std::move(cur);
  }
  return total;
}

Eigen::VectorXd ChainTarget::block_scores(const State& x, const Indices& block,
                                          const Eigen::MatrixXi& candidates) const {
  const Eigen::Index col = block_as_column(block, x.rows());
  if (col < 0) return ModelTarget::block_scores(x, block, candidates);
  Eigen::VectorXd scores = column_log_emissions(col, candidates);
  if (col == 0) {
    scores += log_initial(candidates);
  } else {
    scores += log_transitions(Eigen::MatrixXi(x.col(col - 1)), candidates).row(0).transpose();
  }
  if (col + 1 < x.cols()) {
    scores += log_transitions(candidates, Eigen::MatrixXi(x.col(col + 1))).col(0);
  }
  return scores;
}

}  // namespace hbs
