#include "hbs/models/fhmm.hpp"

#include <cmath>
#include <numbers>

#include "hbs/error.hpp"

namespace hbs {

FhmmModel::FhmmModel(Eigen::MatrixXd y, FhmmSpec spec, double sigma2)
    : y_(std::move(y)), spec_(std::move(spec)) {
  const Eigen::Index k = spec_.features.cols();
  const Eigen::Index l = spec_.features.rows();
  HBS_REQUIRE(k >= 1 && l >= 1, "FHMM needs at least one chain and one output dimension");
  HBS_REQUIRE(y_.rows() == l, "observations and features differ in dimension");
  HBS_REQUIRE(y_.cols() >= 1, "FHMM needs at least one time step");
  if (spec_.offset.size() == 0) spec_.offset = Eigen::VectorXd::Zero(l);
  HBS_REQUIRE(spec_.offset.size() == l, "offset w_0 has the wrong dimension");
  HBS_REQUIRE(spec_.flip.size() == k && spec_.initial.size() == k,
              "need one flip and one initial probability per chain");
  HBS_REQUIRE(spec_.flip.minCoeff() > 0.0 && spec_.flip.maxCoeff() < 1.0,
              "flip probabilities must lie in (0, 1)");
  HBS_REQUIRE(spec_.initial.minCoeff() > 0.0 && spec_.initial.maxCoeff() < 1.0,
              "initial probabilities must lie in (0, 1)");
  HBS_REQUIRE(spec_.a0 > 0.0 && spec_.b0 > 0.0, "sigma^2 prior parameters must be positive");
  set_sigma2(sigma2);
  flip_weight_ = (spec_.flip.array().log() - (1.0 - spec_.flip.array()).log()).matrix();
  stay_total_ = (1.0 - spec_.flip.array()).log().sum();
}

std::unique_ptr<ModelTarget> FhmmModel::clone() const {
  return std::make_unique<FhmmModel>(*this);
}

void FhmmModel::set_sigma2(double sigma2) {
  HBS_REQUIRE(sigma2 > 0.0 && std::isfinite(sigma2), "sigma^2 must be positive and finite");
  sigma2_ = sigma2;
}

Eigen::VectorXd FhmmModel::column_log_emissions(Eigen::Index col,
                                                const Eigen::MatrixXi& candidates) const {
  HBS_REQUIRE(candidates.rows() == rows(), "candidate column has the wrong length");
  const Eigen::MatrixXd means =
      (spec_.features * candidates.cast<double>()).colwise() + spec_.offset;
  const Eigen::VectorXd sq = (means.colwise() - y_.col(col)).colwise().squaredNorm().transpose();
  const double l = static_cast<double>(y_.rows());
  const double norm = -0.5 * l * std::log(2.0 * std::numbers::pi * sigma2_);
  return (norm - sq.array() / (2.0 * sigma2_)).matrix();
}

Eigen::VectorXd FhmmModel::log_initial(const Eigen::MatrixXi& candidates) const {
  const Eigen::ArrayXd log_on = spec_.initial.array().log();
  const Eigen::ArrayXd log_off = (1.0 - spec_.initial.array()).log();
  const Eigen::MatrixXd on = candidates.cast<double>();
  return (on.transpose() * (log_on - log_off).matrix()).array() + log_off.sum();
}

Eigen::MatrixXd FhmmModel::log_transitions(const Eigen::MatrixXi& from,
                                           const Eigen::MatrixXi& to) const {
  // [a != b] = a + b - 2ab for binary entries.
  const Eigen::MatrixXd a = from.cast<double>();
  const Eigen::MatrixXd b = to.cast<double>();
  const Eigen::VectorXd from_w = a.transpose() * flip_weight_;
  const Eigen::RowVectorXd to_w = flip_weight_.transpose() * b;
  Eigen::MatrixXd out = -2.0 * (a.transpose() * flip_weight_.asDiagonal() * b);
  out.colwise() += from_w;
  out.rowwise() += to_w;
  return out.array() + stay_total_;
}

double FhmmModel::log_constant() const {
  return spec_.a0 * std::log(spec_.b0) - std::lgamma(spec_.a0) -
         (spec_.a0 + 1.0) * std::log(sigma2_) - spec_.b0 / sigma2_;
}

double FhmmModel::column_loglik(Eigen::Index col,
                                const Eigen::Ref<const Eigen::VectorXi>& x) const {
  HBS_REQUIRE(col >= 0 && col < y_.cols(), "time index out of range");
  HBS_REQUIRE(x.size() == rows(), "state column has the wrong length");
  return column_log_emissions(col, Eigen::MatrixXi(x))(0);
}

double FhmmModel::transition_logprob(const Eigen::Ref<const Eigen::VectorXi>& prev,
                                     const Eigen::Ref<const Eigen::VectorXi>& x) const {
  HBS_REQUIRE(prev.size() == rows() && x.size() == rows(), "state column has the wrong length");
  return log_transitions(Eigen::MatrixXi(prev), Eigen::MatrixXi(x))(0, 0);
}

Eigen::VectorXd FhmmModel::parameters() const { return Eigen::VectorXd::Constant(1, sigma2_); }

std::vector<std::string> FhmmModel::parameter_names() const { return {"sigma2"}; }

void FhmmModel::set_parameters(const Eigen::VectorXd& theta) {
  HBS_REQUIRE(theta.size() == 1, "FHMM has a single parameter sigma^2");
  set_sigma2(theta(0));
}

double FhmmModel::residual_sum_of_squares(const State& x) const {
  HBS_REQUIRE(x.rows() == rows() && x.cols() == cols(), "FHMM state has the wrong shape");
  const Eigen::MatrixXd means = (spec_.features * x.cast<double>()).colwise() + spec_.offset;
  return (y_ - means).squaredNorm();
}

std::pair<double, double> FhmmModel::sigma2_posterior(const State& x) const {
  const double count = static_cast<double>(y_.size());
  return {spec_.a0 + 0.5 * count, spec_.b0 + 0.5 * residual_sum_of_squares(x)};
}

void FhmmModel::update_parameters(const State& x, Rng& rng) {
  const auto [shape, rate] = sigma2_posterior(x);
  set_sigma2(rate / rng.gamma(shape));
}

std::unique_ptr<ParameterProposal> FhmmModel::joint_proposal() const {
  return std::make_unique<LogRandomWalkProposal>(std::vector<Eigen::Index>{0},
                                                 spec_.proposal_scale);
}

}  // namespace hbs
