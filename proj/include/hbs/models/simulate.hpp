#ifndef HBS_MODELS_SIMULATE_HPP_
#define HBS_MODELS_SIMULATE_HPP_

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "hbs/models/fhmm.hpp"
#include "hbs/models/tumor.hpp"
#include "hbs/rng.hpp"

namespace hbs {

/// Clone-by-mutation genotype matrix and clone weights.
struct Architecture {
  Eigen::MatrixXi x;
  Eigen::VectorXd theta;
};

/// Linear phylogeny giving phi = (0.5, 0.3, 0.15) with max weight 0.4.
Architecture linear_architecture();
/// Branched phylogeny giving the same phi with max weight 0.6.
Architecture branched_architecture();

struct TumorSimParams {
  Architecture truth = linear_architecture();
  int depth = 1000;
  double error_rate = 0.001;
  /// Each mutation of the architecture appears this many times.
  int copies = 1;
};

struct TumorDataset {
  TumorData data;
  Eigen::MatrixXi x;
  Eigen::VectorXd theta;
  Eigen::VectorXd phi;
};

TumorDataset simulate_tumor(const TumorSimParams& params, Rng& rng);

struct RegressionSimParams {
  int n = 100;
  int d = 1200;
  /// 0-based indices of the duplicated column pair.
  Eigen::Index confounder = 10;
  Eigen::Index duplicate = 610;
  double coefficient = 1.0;
  /// Variance of the signal over variance of the noise.
  double snr = 5.0;
};

struct RegressionDataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd z;  // standardized columns
  std::vector<Eigen::Index> active;
};

RegressionDataset simulate_regression(const RegressionSimParams& params, Rng& rng);

struct FhmmSimParams {
  int n = 1000;
  int k = 10;
  int l = 1;
  double sigma2 = 0.01;
  double flip = 0.05;
  double initial = 0.5;
  /// Features are w_k = feature_scale * (k + 1) / K before jitter; see
  /// fhmm_features for the full construction.
  double feature_scale = 1.0;
  double feature_jitter = 0.02;
};

/// L x K feature matrix. Chain k contributes a level proportional to k + 1,
/// so many sums of features nearly coincide.
Eigen::MatrixXd fhmm_features(const FhmmSimParams& params, Rng& rng);

struct FhmmDataset {
  Eigen::MatrixXd y;  // L x N
  FhmmSpec spec;
  Eigen::MatrixXi x;  // K x N
  double sigma2 = 0.0;
};

FhmmDataset simulate_fhmm(const FhmmSimParams& params, Rng& rng);

using Dataset = std::variant<TumorDataset, RegressionDataset, FhmmDataset>;

struct ExperimentParams {
  TumorSimParams tumor;
  RegressionSimParams regression;
  FhmmSimParams fhmm;
};

/// name is one of "tumor", "regression", "fhmm"; anything else throws
/// ContractError.
Dataset simulate_experiment(const std::string& name, const ExperimentParams& params, Rng& rng);

}  // namespace hbs

#endif  // HBS_MODELS_SIMULATE_HPP_
