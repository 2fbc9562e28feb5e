#ifndef HBS_MODELS_REGRESSION_HPP_
#define HBS_MODELS_REGRESSION_HPP_

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "hbs/model.hpp"

namespace hbs {

struct RegressionPrior {
  /// g-prior scale; non-positive means g = N.
  double g = -1.0;
  double a_sigma = 0.1;
  double b_sigma = 0.1;
  double a_pi = 0.001;
  double b_pi = 1.0;
};

/// Sparse linear regression with coefficients, noise variance and inclusion
/// probability integrated out. The state is a D x 1 binary inclusion vector.
class RegressionModel final : public ModelTarget {
 public:
  /// `y` is centered on construction.
  RegressionModel(Eigen::VectorXd y, Eigen::MatrixXd z, RegressionPrior prior = {});
  RegressionModel(const RegressionModel& other);

  std::unique_ptr<ModelTarget> clone() const override;
  Eigen::Index rows() const override { return z_.cols(); }
  Eigen::Index cols() const override { return 1; }
  int alphabet_size() const override { return 2; }
  Structure structure() const override { return Structure::kUnstructured; }

  double log_joint(const State& x) const override;
  /// Entries outside the block are read once; each candidate only adds its
  /// own active indices.
  Eigen::VectorXd block_scores(const State& x, const Indices& block,
                               const Eigen::MatrixXi& candidates) const override;

  /// log C - (2 a_sigma + N - 1) / 2 log(2 b_sigma + S) for a set of 0-based
  /// column indices (duplicates are rejected).
  double log_marginal(std::vector<Eigen::Index> active) const;

  /// S = y'y - g / (1 + g) y' P y, P the projection onto span(Z_active).
  double residual_sum(const std::vector<Eigen::Index>& active) const;

  const Eigen::VectorXd& y() const noexcept { return y_; }
  const Eigen::MatrixXd& design() const noexcept { return z_; }
  double g() const noexcept { return g_; }
  const RegressionPrior& prior() const noexcept { return prior_; }
  std::size_t cache_size() const;

 private:
  double evaluate(const std::vector<Eigen::Index>& sorted_active) const;

  Eigen::VectorXd y_;
  Eigen::MatrixXd z_;
  RegressionPrior prior_;
  double g_;
  double yty_;
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::string, double> cache_;
};

}  // namespace hbs

#endif  // HBS_MODELS_REGRESSION_HPP_
