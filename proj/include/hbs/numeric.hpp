#ifndef HBS_NUMERIC_HPP_
#define HBS_NUMERIC_HPP_

#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "hbs/error.hpp"
#include "hbs/rng.hpp"

namespace hbs {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum(exp(v))). Returns -inf for an empty input or when every entry is -inf.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.derived().array() - mx).exp().sum());
}

/// Draws an index with probability proportional to exp(log_weights[i]).
/// A single uniform is compared against the cumulative normalized weights, so
/// ties resolve to the lowest index. Throws NumericalError when no entry has
/// positive finite weight; `block` is reported with the error.
template <typename Derived>
Eigen::Index sample_log_categorical(const Eigen::DenseBase<Derived>& log_weights, Rng& rng,
                                    long block = -1) {
  const double lse = log_sum_exp(log_weights);
  if (!std::isfinite(lse)) {
    throw NumericalError("degenerate categorical: no candidate has positive finite weight",
                         block);
  }
  const double u = rng.uniform();
  double acc = 0.0;
  Eigen::Index last_positive = -1;
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    const double p = std::exp(static_cast<double>(log_weights.derived().coeff(i)) - lse);
    if (p > 0.0) last_positive = i;
    acc += p;
    if (u < acc) return i;
  }
  // Rounding left the cumulative sum just below u.
  return last_positive;
}

}  // namespace hbs

#endif  // HBS_NUMERIC_HPP_
