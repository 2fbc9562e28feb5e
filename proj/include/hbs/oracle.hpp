#ifndef HBS_ORACLE_HPP_
#define HBS_ORACLE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hbs/engine.hpp"
#include "hbs/model.hpp"
#include "hbs/state.hpp"

namespace hbs {

/// Every state of a small target with its log density, in canonical order:
/// each column runs through the ball order around the zero column with radius
/// equal to the column length, and columns vary lexicographically with the
/// first column slowest.
class ExactTable {
 public:
  ExactTable(Eigen::Index rows, Eigen::Index cols, int alphabet_size);

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }
  int alphabet_size() const noexcept { return alphabet_size_; }
  Eigen::Index size() const noexcept { return size_; }

  State state(Eigen::Index index) const;
  Eigen::Index index(const State& x) const;

  const Eigen::VectorXd& log_density() const noexcept { return log_density_; }
  double log_normalizer() const noexcept { return log_normalizer_; }
  const Eigen::VectorXd& probabilities() const noexcept { return probabilities_; }

  /// Sets unnormalized log densities and normalizes.
  void set_log_density(Eigen::VectorXd log_density);

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  int alphabet_size_;
  Eigen::Index size_;
  Eigen::MatrixXi column_values_;         // rows x S^rows in ball order
  std::vector<Eigen::Index> column_rank_;  // base-S code -> position in column_values_
  Eigen::VectorXd log_density_;
  double log_normalizer_ = 0.0;
  Eigen::VectorXd probabilities_;
};

/// Enumerates log_joint over all states at the model's current parameters.
/// Throws ContractError when there are more than `bound` states.
ExactTable exact_posterior(const ModelTarget& model, std::uint64_t bound = 1'000'000);

/// Row e, column s: P(entry e = s), entries in column-major order.
Eigen::MatrixXd exact_marginals(const ExactTable& table);

/// P(entry = 1) for binary tables.
Eigen::VectorXd inclusion_probabilities(const ExactTable& table);

/// One-iteration transition matrix of `config.scheme` with parameters held
/// fixed, integrating exactly over partitions, radii and auxiliary states.
/// Built from log densities in `table` only. At most `bound` states.
Eigen::MatrixXd exact_kernel(const SamplerConfig& config, const ModelTarget& model,
                             const ExactTable& table, Eigen::Index bound = 4096);

/// Kernel of an exact Gibbs update of one block (flat column-major indices).
Eigen::MatrixXd single_block_gibbs_kernel(const ExactTable& table, const Indices& block);

/// Ordered partitions drawn by the sampler for `model` under `config`, with
/// their probabilities.
std::vector<std::pair<Partition, double>> partition_distribution(const SamplerConfig& config,
                                                                 const ModelTarget& model);

/// Radius vectors for blocks of the given sizes, with their probabilities.
std::vector<std::pair<std::vector<int>, double>> radius_distribution(
    const BallSpec& spec, const std::vector<int>& block_sizes);

void write_table_csv(std::ostream& out, const ExactTable& table);
ExactTable read_table_csv(std::istream& in);

}  // namespace hbs

#endif  // HBS_ORACLE_HPP_
