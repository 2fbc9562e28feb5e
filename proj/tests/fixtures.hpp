#ifndef HBS_TESTS_FIXTURES_HPP_
#define HBS_TESTS_FIXTURES_HPP_

#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "hbs/model.hpp"
#include "hbs/models/fhmm.hpp"
#include "hbs/models/regression.hpp"
#include "hbs/models/tumor.hpp"
#include "hbs/rng.hpp"

namespace hbs::testing {

// Base-S code of a column, first entry least significant.
inline Eigen::Index column_code(const Eigen::Ref<const Eigen::VectorXi>& col, int s) {
  Eigen::Index code = 0;
  for (Eigen::Index r = col.size() - 1; r >= 0; --r) code = code * s + col(r);
  return code;
}

inline Eigen::Index power(Eigen::Index base, Eigen::Index exp) {
  Eigen::Index out = 1;
  while (exp-- > 0) out *= base;
  return out;
}

// Column-factorized target with an arbitrary random table per column.
class TableFactorModel final : public FactorizedTarget {
 public:
  TableFactorModel(Eigen::Index rows, Eigen::Index cols, int s, Rng& rng, double spread = 2.0)
      : rows_(rows), cols_(cols), s_(s), table_(power(s, rows), cols) {
    for (Eigen::Index i = 0; i < table_.size(); ++i) table_.data()[i] = spread * rng.normal();
  }
  std::unique_ptr<ModelTarget> clone() const override {
    return std::make_unique<TableFactorModel>(*this);
  }
  Eigen::Index rows() const override { return rows_; }
  Eigen::Index cols() const override { return cols_; }
  int alphabet_size() const override { return s_; }
  Eigen::VectorXd column_log_factors(Eigen::Index col,
                                     const Eigen::MatrixXi& candidates) const override {
    Eigen::VectorXd out(candidates.cols());
    for (Eigen::Index j = 0; j < candidates.cols(); ++j)
      out(j) = table_(column_code(candidates.col(j), s_), col);
    return out;
  }
  double log_constant() const override { return 0.75; }

 private:
  Eigen::Index rows_, cols_;
  int s_;
  Eigen::MatrixXd table_;
};

// Markov chain over columns with random emission, initial and transition tables.
class TableChainModel final : public ChainTarget {
 public:
  TableChainModel(Eigen::Index rows, Eigen::Index cols, int s, Rng& rng, double spread = 1.5)
      : rows_(rows), cols_(cols), s_(s) {
    const Eigen::Index m = power(s, rows);
    emission_.resize(m, cols);
    initial_.resize(m);
    transition_.resize(m, m);
    for (Eigen::Index i = 0; i < emission_.size(); ++i) emission_.data()[i] = spread * rng.normal();
    for (Eigen::Index i = 0; i < m; ++i) initial_(i) = spread * rng.normal();
    for (Eigen::Index i = 0; i < transition_.size(); ++i)
      transition_.data()[i] = spread * rng.normal();
  }
  std::unique_ptr<ModelTarget> clone() const override {
    return std::make_unique<TableChainModel>(*this);
  }
  Eigen::Index rows() const override { return rows_; }
  Eigen::Index cols() const override { return cols_; }
  int alphabet_size() const override { return s_; }
  Eigen::VectorXd column_log_emissions(Eigen::Index col,
                                       const Eigen::MatrixXi& candidates) const override {
    Eigen::VectorXd out(candidates.cols());
    for (Eigen::Index j = 0; j < candidates.cols(); ++j)
      out(j) = emission_(column_code(candidates.col(j), s_), col);
    return out;
  }
  Eigen::VectorXd log_initial(const Eigen::MatrixXi& candidates) const override {
    Eigen::VectorXd out(candidates.cols());
    for (Eigen::Index j = 0; j < candidates.cols(); ++j)
      out(j) = initial_(column_code(candidates.col(j), s_));
    return out;
  }
  Eigen::MatrixXd log_transitions(const Eigen::MatrixXi& from,
                                  const Eigen::MatrixXi& to) const override {
    Eigen::MatrixXd out(from.cols(), to.cols());
    for (Eigen::Index a = 0; a < from.cols(); ++a)
      for (Eigen::Index b = 0; b < to.cols(); ++b)
        out(a, b) = transition_(column_code(from.col(a), s_), column_code(to.col(b), s_));
    return out;
  }
  double log_constant() const override { return -0.25; }

 private:
  Eigen::Index rows_, cols_;
  int s_;
  Eigen::MatrixXd emission_;
  Eigen::VectorXd initial_;
  Eigen::MatrixXd transition_;
};

// Small regression with columns 0 and 1 identical and y driven by them.
inline RegressionModel regression_toy(int d, int n, std::uint64_t seed, double noise = 0.7) {
  Rng rng(seed);
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  z.col(1) = z.col(0);
  Eigen::VectorXd y = z.col(0) + 0.5 * z.col(d - 1);
  for (int i = 0; i < n; ++i) y(i) += noise * rng.normal();
  return RegressionModel(y, z);
}

inline TumorModel tumor_toy() {
  TumorData data;
  data.reads = Eigen::Vector2i(48, 31);
  data.depth = Eigen::Vector2i(100, 100);
  TumorModel model(data, 2);
  model.set_gamma(Eigen::Vector2d(0.6, 0.4));
  model.set_f(Eigen::Vector2d(0.4, 0.7));
  return model;
}

inline FhmmModel fhmm_toy(int k = 2, int n = 3, std::uint64_t seed = 5) {
  Rng rng(seed);
  FhmmSpec spec;
  spec.features.resize(2, k);
  for (Eigen::Index i = 0; i < spec.features.size(); ++i) spec.features.data()[i] = rng.normal();
  spec.flip = Eigen::VectorXd::Constant(k, 0.2);
  spec.initial = Eigen::VectorXd::Constant(k, 0.4);
  Eigen::MatrixXd y(2, n);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
  return FhmmModel(y, spec, 0.8);
}

}  // namespace hbs::testing

#endif  // HBS_TESTS_FIXTURES_HPP_
