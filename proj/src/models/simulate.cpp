#include "hbs/models/simulate.hpp"

#include <cmath>

#include "hbs/error.hpp"

namespace hbs {

Architecture linear_architecture() {
  Architecture a;
  a.x.resize(3, 3);
  a.x << 1, 1, 1,
         1, 1, 0,
         1, 0, 0;
  a.theta = Eigen::Vector3d(0.3, 0.3, 0.4);
  return a;
}

Architecture branched_architecture() {
  Architecture a;
  a.x.resize(3, 3);
  a.x << 1, 0, 0,
         1, 1, 0,
         1, 0, 1;
  a.theta = Eigen::Vector3d(0.1, 0.6, 0.3);
  return a;
}

TumorDataset simulate_tumor(const TumorSimParams& params, Rng& rng) {
  HBS_REQUIRE(params.depth >= 1 && params.copies >= 1, "depth and copies must be positive");
  const Eigen::MatrixXi& base = params.truth.x;
  const Eigen::Index n = base.cols() * params.copies;
  TumorDataset out;
  out.x.resize(base.rows(), n);
  for (int c = 0; c < params.copies; ++c) out.x.middleCols(c * base.cols(), base.cols()) = base;
  out.theta = params.truth.theta;
  out.phi = tumor_allele_frequencies(out.x, out.theta, params.error_rate);
  out.data.reads.resize(n);
  out.data.depth = Eigen::VectorXi::Constant(n, params.depth);
  for (Eigen::Index i = 0; i < n; ++i) out.data.reads(i) = rng.binomial(params.depth, out.phi(i));
  return out;
}

RegressionDataset simulate_regression(const RegressionSimParams& params, Rng& rng) {
  HBS_REQUIRE(params.n >= 3 && params.d >= 2, "regression needs n >= 3 and d >= 2");
  HBS_REQUIRE(params.confounder >= 0 && params.confounder < params.d && params.duplicate >= 0 &&
                  params.duplicate < params.d && params.confounder != params.duplicate,
              "confounder indices must be distinct columns of the design");
  HBS_REQUIRE(params.snr > 0.0, "signal-to-noise ratio must be positive");
  RegressionDataset out;
  out.z.resize(params.n, params.d);
  for (Eigen::Index j = 0; j < params.d; ++j) {
    for (Eigen::Index i = 0; i < params.n; ++i) out.z(i, j) = rng.normal();
    auto col = out.z.col(j);
    col.array() -= col.mean();
    col /= std::sqrt(col.squaredNorm() / (params.n - 1));
  }
  out.z.col(params.duplicate) = out.z.col(params.confounder);
  const double noise_sd = std::abs(params.coefficient) / std::sqrt(params.snr);
  out.y = params.coefficient * out.z.col(params.confounder);
  for (Eigen::Index i = 0; i < params.n; ++i) out.y(i) += rng.normal(0.0, noise_sd);
  out.active = {params.confounder};
  return out;
}

Eigen::MatrixXd fhmm_features(const FhmmSimParams& params, Rng& rng) {
  HBS_REQUIRE(params.k >= 1 && params.l >= 1, "need at least one chain and one dimension");
  Eigen::MatrixXd w(params.l, params.k);
  for (Eigen::Index k = 0; k < params.k; ++k) {
    for (Eigen::Index r = 0; r < params.l; ++r) {
      w(r, k) = params.feature_scale * (k + 1.0) / params.k + params.feature_jitter * rng.normal();
    }
  }
  return w;
}

FhmmDataset simulate_fhmm(const FhmmSimParams& params, Rng& rng) {
  HBS_REQUIRE(params.n >= 1, "FHMM needs at least one time step");
  HBS_REQUIRE(params.sigma2 > 0.0, "noise variance must be positive");
  HBS_REQUIRE(params.flip > 0.0 && params.flip < 1.0 && params.initial > 0.0 &&
                  params.initial < 1.0,
              "flip and initial probabilities must lie in (0, 1)");
  FhmmDataset out;
  out.sigma2 = params.sigma2;
  out.spec.features = fhmm_features(params, rng);
  out.spec.offset = Eigen::VectorXd::Zero(params.l);
  out.spec.flip = Eigen::VectorXd::Constant(params.k, params.flip);
  out.spec.initial = Eigen::VectorXd::Constant(params.k, params.initial);
  out.x.resize(params.k, params.n);
  for (Eigen::Index k = 0; k < params.k; ++k) {
    out.x(k, 0) = rng.bernoulli(params.initial) ? 1 : 0;
    for (Eigen::Index i = 1; i < params.n; ++i) {
      const bool flip = rng.bernoulli(params.flip);
      out.x(k, i) = flip ? 1 - out.x(k, i - 1) : out.x(k, i - 1);
    }
  }
  out.y = (out.spec.features * out.x.cast<double>()).colwise() + out.spec.offset;
  const double sd = std::sqrt(params.sigma2);
  for (Eigen::Index i = 0; i < out.y.size(); ++i) out.y.data()[i] += rng.normal(0.0, sd);
  return out;
}

Dataset simulate_experiment(const std::string& name, const ExperimentParams& params, Rng& rng) {
  if (name == "tumor") return simulate_tumor(params.tumor, rng);
  if (name == "regression") return simulate_regression(params.regression, rng);
  if (name == "fhmm") return simulate_fhmm(params.fhmm, rng);
  throw ContractError("unknown experiment '" + name + "' (expected tumor, regression or fhmm)");
}

}  // namespace hbs
