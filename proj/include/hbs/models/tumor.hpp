#ifndef HBS_MODELS_TUMOR_HPP_
#define HBS_MODELS_TUMOR_HPP_

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hbs/model.hpp"

namespace hbs {

/// Read counts per mutation: `reads(i)` variant reads out of `depth(i)`.
struct TumorData {
  Eigen::VectorXi reads;
  Eigen::VectorXi depth;
};

struct TumorPrior {
  double error_rate = 0.001;  // e
  double alpha = 1.0;         // gamma_k ~ Gamma(alpha / K, 1)
  double f_alpha = 1.0;       // f_i ~ Beta(f_alpha, f_beta)
  double f_beta = 1.0;
  /// Standard deviation of the log-scale random walk on gamma.
  double proposal_scale = 0.25;
  /// Shape of the Gamma independence component of the joint proposal.
  double independence_shape = 1.0;
  /// Probability of the random-walk component in the joint proposal.
  double random_walk_weight = 0.5;
};

/// phi_i = (1 - e) p_i + e (1 - p_i) with p = theta^T X / 2. X is K x N
/// (rows = clones, columns = mutations); theta must lie on the simplex.
Eigen::VectorXd tumor_allele_frequencies(const Eigen::MatrixXi& x, const Eigen::VectorXd& theta,
                                         double error_rate);

/// log p(y, X, gamma, f). Throws ContractError when some phi_i is not in (0, 1).
double tumor_log_joint(const TumorData& data, const TumorPrior& prior, const Eigen::MatrixXi& x,
                       const Eigen::VectorXd& gamma, const Eigen::VectorXd& f);

/// Binomial mixture over subclone genotypes. Parameters are (gamma_1..K,
/// f_1..N); columns of X are independent given them.
class TumorModel final : public FactorizedTarget {
 public:
  TumorModel(TumorData data, int clones, TumorPrior prior = {});

  std::unique_ptr<ModelTarget> clone() const override;
  Eigen::Index rows() const override { return clones_; }
  Eigen::Index cols() const override { return data_.reads.size(); }
  int alphabet_size() const override { return 2; }

  Eigen::VectorXd column_log_factors(Eigen::Index col,
                                     const Eigen::MatrixXi& candidates) const override;
  double log_constant() const override;

  Eigen::VectorXd parameters() const override;
  std::vector<std::string> parameter_names() const override;
  void set_parameters(const Eigen::VectorXd& theta) override;

  /// One log-scale random-walk Metropolis sweep over gamma, then the exact
  /// Beta update of f.
  void update_parameters(const State& x, Rng& rng) override;
  std::unique_ptr<ParameterProposal> joint_proposal() const override;
  /// f given X (gamma is proposed jointly with X).
  void update_unproposed_parameters(const State& x, Rng& rng) override;

  /// One Metropolis sweep over the components of gamma; returns accept count.
  int update_gamma(const State& x, Rng& rng);
  /// f_i ~ Beta(f_alpha + sum_k x_ki, f_beta + K - sum_k x_ki).
  void update_f(const State& x, Rng& rng);

  const TumorData& data() const noexcept { return data_; }
  const TumorPrior& prior() const noexcept { return prior_; }
  const Eigen::VectorXd& gamma() const noexcept { return gamma_; }
  const Eigen::VectorXd& f() const noexcept { return f_; }
  /// theta = gamma / sum(gamma).
  Eigen::VectorXd weights() const { return gamma_ / gamma_.sum(); }
  void set_gamma(const Eigen::VectorXd& gamma);
  void set_f(const Eigen::VectorXd& f);

 private:
  double read_log_likelihood(const State& x, const Eigen::VectorXd& gamma) const;

  TumorData data_;
  int clones_;
  TumorPrior prior_;
  Eigen::VectorXd gamma_;
  Eigen::VectorXd f_;
  Eigen::VectorXd log_binom_coef_;
};

}  // namespace hbs

#endif  // HBS_MODELS_TUMOR_HPP_
