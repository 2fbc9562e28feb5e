#ifndef HBS_MODEL_HPP_
#define HBS_MODEL_HPP_

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hbs/rng.hpp"
#include "hbs/state.hpp"

namespace hbs {

/// How p(X | theta, U, y) decomposes, which decides the exact state update.
enum class Structure {
  kFactorized,    // columns conditionally independent given theta
  kMarkovChain,   // columns form a Markov chain
  kUnstructured,  // no usable decomposition
};

/// Proposal q(theta' | theta) for the joint Metropolis-Hastings update.
class ParameterProposal {
 public:
  virtual ~ParameterProposal() = default;
  virtual Eigen::VectorXd propose(const Eigen::VectorXd& from, Rng& rng) const = 0;
  /// log q(to | from).
  virtual double log_density(const Eigen::VectorXd& to, const Eigen::VectorXd& from) const = 0;
};

/// Multiplicative random walk on the coordinates in `moved`: log to_k =
/// log from_k + N(0, scale^2). Other coordinates are copied.
class LogRandomWalkProposal final : public ParameterProposal {
 public:
  LogRandomWalkProposal(std::vector<Eigen::Index> moved, double scale);
  Eigen::VectorXd propose(const Eigen::VectorXd& from, Rng& rng) const override;
  double log_density(const Eigen::VectorXd& to, const Eigen::VectorXd& from) const override;

 private:
  std::vector<Eigen::Index> moved_;
  double scale_;
};

/// Independent Gamma(shape_k, 1) draws for the coordinates in `moved`.
class GammaIndependenceProposal final : public ParameterProposal {
 public:
  GammaIndependenceProposal(std::vector<Eigen::Index> moved, Eigen::VectorXd shapes);
  Eigen::VectorXd propose(const Eigen::VectorXd& from, Rng& rng) const override;
  double log_density(const Eigen::VectorXd& to, const Eigen::VectorXd& from) const override;

 private:
  std::vector<Eigen::Index> moved_;
  Eigen::VectorXd shapes_;
};

/// With probability `weight` use `first`, otherwise `second`.
class MixtureProposal final : public ParameterProposal {
 public:
  MixtureProposal(double weight, std::unique_ptr<ParameterProposal> first,
                  std::unique_ptr<ParameterProposal> second);
  Eigen::VectorXd propose(const Eigen::VectorXd& from, Rng& rng) const override;
  double log_density(const Eigen::VectorXd& to, const Eigen::VectorXd& from) const override;

 private:
  double weight_;
  std::unique_ptr<ParameterProposal> first_;
  std::unique_ptr<ParameterProposal> second_;
};

/// A target distribution over a discrete state X with parameters theta held
/// by the model. Evaluation methods are const and side-effect free (caches
/// aside); parameter methods mutate the model.
class ModelTarget {
 public:
  virtual ~ModelTarget() = default;

  virtual std::unique_ptr<ModelTarget> clone() const = 0;

  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  Eigen::Index size() const { return rows() * cols(); }
  virtual int alphabet_size() const = 0;
  virtual Structure structure() const = 0;

  /// log p(y, X, theta) at the current parameters.
  virtual double log_joint(const State& x) const = 0;

  /// Score of each column of `candidates` substituted into `block` of `x`.
  /// Differences between scores equal differences of log_joint. The default
  /// evaluates log_joint on each substituted state.
  virtual Eigen::VectorXd block_scores(const State& x, const Indices& block,
                                       const Eigen::MatrixXi& candidates) const;

  double block_score(const State& x, const Indices& block, const BlockRef& candidate) const;

  virtual Eigen::VectorXd parameters() const { return {}; }
  virtual std::vector<std::string> parameter_names() const { return {}; }
  virtual void set_parameters(const Eigen::VectorXd& /*theta*/) {}

  /// theta <- p(theta | X, y).
  virtual void update_parameters(const State& /*x*/, Rng& /*rng*/) {}

  /// Proposal for the joint (theta, X) Metropolis-Hastings update, or null
  /// when the model has nothing to propose.
  virtual std::unique_ptr<ParameterProposal> joint_proposal() const { return nullptr; }

  /// Conditional update of the parameters the joint proposal leaves fixed.
  virtual void update_unproposed_parameters(const State& /*x*/, Rng& /*rng*/) {}

  /// Initial state used when a run does not supply one.
  virtual State initial_state() const { return State::Zero(rows(), cols()); }
};

/// log_joint(X) = log_constant() + sum_c column_log_factors(c, x_c).
class FactorizedTarget : public ModelTarget {
 public:
  Structure structure() const final { return Structure::kFactorized; }

  /// Log factor of each candidate (one per column of `candidates`) for column `col`.
  virtual Eigen::VectorXd column_log_factors(Eigen::Index col,
                                             const Eigen::MatrixXi& candidates) const = 0;
  /// Terms of log_joint not depending on X.
  virtual double log_constant() const = 0;

  double log_joint(const State& x) const override;
  Eigen::VectorXd block_scores(const State& x, const Indices& block,
                               const Eigen::MatrixXi& candidates) const override;
};

/// log_joint(X) = log_constant() + log_initial(x_0) + sum_c log_emission(c, x_c)
///              + sum_{c>0} log_transition(x_{c-1}, x_c).
class ChainTarget : public ModelTarget {
 public:
  Structure structure() const final { return Structure::kMarkovChain; }

  virtual Eigen::VectorXd column_log_emissions(Eigen::Index col,
                                               const Eigen::MatrixXi& candidates) const = 0;
  virtual Eigen::VectorXd log_initial(const Eigen::MatrixXi& candidates) const = 0;
  /// Entry (a, b): log p(to_b | from_a).
  virtual Eigen::MatrixXd log_transitions(const Eigen::MatrixXi& from,
                                          const Eigen::MatrixXi& to) const = 0;
  virtual double log_constant() const = 0;

  double log_joint(const State& x) const override;
  Eigen::VectorXd block_scores(const State& x, const Indices& block,
                               const Eigen::MatrixXi& candidates) const override;
};

}  // namespace hbs

#endif  // HBS_MODEL_HPP_
