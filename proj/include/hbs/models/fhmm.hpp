#ifndef HBS_MODELS_FHMM_HPP_
#define HBS_MODELS_FHMM_HPP_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hbs/model.hpp"

namespace hbs {

/// Known quantities of an additive factorial HMM with K binary chains.
struct FhmmSpec {
  Eigen::MatrixXd features;  // L x K, column k is w_k
  Eigen::VectorXd offset;    // w_0 (L); empty means zero
  Eigen::VectorXd flip;      // rho_k
  Eigen::VectorXd initial;   // nu_k = p(x_k1 = 1)
  double a0 = 0.1;           // sigma^2 ~ InvGamma(a0, b0)
  double b0 = 0.1;
  /// Standard deviation of the log-scale random walk on sigma^2.
  double proposal_scale = 0.1;
};

/// y_i ~ N(w_0 + W x_i, sigma^2 I) with independent two-state Markov chains
/// along the rows of X (K x N). The only sampled parameter is sigma^2.
class FhmmModel final : public ChainTarget {
 public:
  /// `y` is L x N, one observation per column.
  FhmmModel(Eigen::MatrixXd y, FhmmSpec spec, double sigma2 = 1.0);

  std::unique_ptr<ModelTarget> clone() const override;
  Eigen::Index rows() const override { return spec_.features.cols(); }
  Eigen::Index cols() const override { return y_.cols(); }
  int alphabet_size() const override { return 2; }

  Eigen::VectorXd column_log_emissions(Eigen::Index col,
                                       const Eigen::MatrixXi& candidates) const override;
  Eigen::VectorXd log_initial(const Eigen::MatrixXi& candidates) const override;
  Eigen::MatrixXd log_transitions(const Eigen::MatrixXi& from,
                                  const Eigen::MatrixXi& to) const override;
  double log_constant() const override;

  /// log N(y_col | w_0 + W x, sigma^2 I).
  double column_loglik(Eigen::Index col, const Eigen::Ref<const Eigen::VectorXi>& x) const;
  /// log p(x | prev) under the independent flip chains.
  double transition_logprob(const Eigen::Ref<const Eigen::VectorXi>& prev,
                            const Eigen::Ref<const Eigen::VectorXi>& x) const;

  Eigen::VectorXd parameters() const override;
  std::vector<std::string> parameter_names() const override;
  void set_parameters(const Eigen::VectorXd& theta) override;
  /// sigma^2 ~ InvGamma(a0 + N L / 2, b0 + RSS / 2).
  void update_parameters(const State& x, Rng& rng) override;
  std::unique_ptr<ParameterProposal> joint_proposal() const override;

  /// Shape and rate of p(sigma^2 | X, y).
  std::pair<double, double> sigma2_posterior(const State& x) const;
  double residual_sum_of_squares(const State& x) const;

  const Eigen::MatrixXd& y() const noexcept { return y_; }
  const FhmmSpec& spec() const noexcept { return spec_; }
  double sigma2() const noexcept { return sigma2_; }
  void set_sigma2(double sigma2);

 private:
  Eigen::MatrixXd y_;
  FhmmSpec spec_;
  double sigma2_;
  Eigen::VectorXd flip_weight_;  // log rho_k - log(1 - rho_k)
  double stay_total_;            // sum_k log(1 - rho_k)
};

}  // namespace hbs

#endif  // HBS_MODELS_FHMM_HPP_
