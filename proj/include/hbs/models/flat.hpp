#ifndef HBS_MODELS_FLAT_HPP_
#define HBS_MODELS_FLAT_HPP_

#include <memory>

#include "hbs/model.hpp"

namespace hbs {

/// Uniform target over all S-valued rows x cols states.
class FlatModel final : public FactorizedTarget {
 public:
  FlatModel(Eigen::Index rows, Eigen::Index cols, int alphabet_size);

  std::unique_ptr<ModelTarget> clone() const override {
    return std::make_unique<FlatModel>(*this);
  }
  Eigen::Index rows() const override { return rows_; }
  Eigen::Index cols() const override { return cols_; }
  int alphabet_size() const override { return alphabet_size_; }

  Eigen::VectorXd column_log_factors(Eigen::Index /*col*/,
                                     const Eigen::MatrixXi& candidates) const override {
    return Eigen::VectorXd::Zero(candidates.cols());
  }
  double log_constant() const override { return 0.0; }

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  int alphabet_size_;
};

}  // namespace hbs

#endif  // HBS_MODELS_FLAT_HPP_
