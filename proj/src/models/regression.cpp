#include "hbs/models/regression.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "hbs/error.hpp"

namespace hbs {

namespace {

constexpr std::size_t kCacheCapacity = 1 << 20;

std::string cache_key(const std::vector<Eigen::Index>& sorted_active) {
  std::string key;
  key.reserve(sorted_active.size() * sizeof(std::int32_t));
  for (Eigen::Index j : sorted_active) {
    const auto v = static_cast<std::int32_t>(j);
    key.append(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  return key;
}

}  // namespace

RegressionModel::RegressionModel(Eigen::VectorXd y, Eigen::MatrixXd z, RegressionPrior prior)
    : y_(std::move(y)), z_(std::move(z)), prior_(prior) {
  HBS_REQUIRE(y_.size() >= 2, "regression needs at least two responses");
  HBS_REQUIRE(z_.rows() == y_.size(), "design matrix must have one row per response");
  HBS_REQUIRE(z_.cols() >= 1, "design matrix needs at least one column");
  HBS_REQUIRE(prior_.a_sigma > 0.0 && prior_.b_sigma > 0.0 && prior_.a_pi > 0.0 &&
                  prior_.b_pi > 0.0,
              "regression hyperparameters must be positive");
  g_ = prior_.g > 0.0 ? prior_.g : static_cast<double>(y_.size());
  y_.array() -= y_.mean();
  yty_ = y_.squaredNorm();
}

RegressionModel::RegressionModel(const RegressionModel& other)
    : ModelTarget(other),
      y_(other.y_),
      z_(other.z_),
      prior_(other.prior_),
      g_(other.g_),
      yty_(other.yty_) {}

std::unique_ptr<ModelTarget> RegressionModel::clone() const {
  return std::make_unique<RegressionModel>(*this);
}

double RegressionModel::residual_sum(const std::vector<Eigen::Index>& active) const {
  if (active.empty()) return yty_;
  Eigen::MatrixXd sub(z_.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t t = 0; t < active.size(); ++t) sub.col(t) = z_.col(active[t]);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
  const Eigen::Index rank = qr.rank();
  const Eigen::VectorXd qty = qr.householderQ().adjoint() * y_;
  const double projected = qty.head(rank).squaredNorm();
  return yty_ - g_ / (1.0 + g_) * projected;
}

double RegressionModel::evaluate(const std::vector<Eigen::Index>& sorted_active) const {
  const double d = static_cast<double>(z_.cols());
  const double dx = static_cast<double>(sorted_active.size());
  const double n = static_cast<double>(y_.size());
  const double log_c = -0.5 * dx * std::log1p(g_) + std::lgamma(dx + prior_.a_pi) +
                       std::lgamma(d - dx + prior_.b_pi);
  const double s = residual_sum(sorted_active);
  return log_c - 0.5 * (2.0 * prior_.a_sigma + n - 1.0) * std::log(2.0 * prior_.b_sigma + s);
}

double RegressionModel::log_marginal(std::vector<Eigen::Index> active) const {
  std::sort(active.begin(), active.end());
  HBS_REQUIRE(std::adjacent_find(active.begin(), active.end()) == active.end(),
              "active set has duplicate indices");
  HBS_REQUIRE(active.empty() || (active.front() >= 0 && active.back() < z_.cols()),
              "active index outside the design");
  const std::string key = cache_key(active);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const double value = evaluate(active);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (cache_.size() >= kCacheCapacity) cache_.clear();
  cache_.emplace(key, value);
  return value;
}

std::size_t RegressionModel::cache_size() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return cache_.size();
}

double RegressionModel::log_joint(const State& x) const {
  HBS_REQUIRE(x.rows() == z_.cols() && x.cols() == 1, "regression state must be D x 1");
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    HBS_REQUIRE(x(j) == 0 || x(j) == 1, "regression state must be binary");
    if (x(j) == 1) active.push_back(j);
  }
  return log_marginal(std::move(active));
}

Eigen::VectorXd RegressionModel::block_scores(const State& x, const Indices& block,
                                              const Eigen::MatrixXi& candidates) const {
  HBS_REQUIRE(candidates.rows() == static_cast<Eigen::Index>(block.size()),
              "candidate length differs from block size");
  std::vector<char> in_block(x.size(), 0);
  for (Eigen::Index k : block) in_block[k] = 1;
  std::vector<Eigen::Index> outside;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!in_block[j] && x(j) == 1) outside.push_back(j);
  }
  Eigen::VectorXd out(candidates.cols());
  for (Eigen::Index c = 0; c < candidates.cols(); ++c) {
    std::vector<Eigen::Index> active = outside;
    for (std::size_t t = 0; t < block.size(); ++t) {
      if (candidates(static_cast<Eigen::Index>(t), c) == 1) active.push_back(block[t]);
    }
    out(c) = log_marginal(std::move(active));
  }
  return out;
}

}  // namespace hbs
