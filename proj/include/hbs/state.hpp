#ifndef HBS_STATE_HPP_
#define HBS_STATE_HPP_

#include <vector>

#include <Eigen/Core>

#include "hbs/ball.hpp"
#include "hbs/rng.hpp"

namespace hbs {

/// The latent object X (or auxiliary U): a rows x cols matrix of symbols. A
/// D-dimensional vector is stored as D x 1.
using State = Eigen::MatrixXi;

/// Flat column-major indices into a State.
using Indices = std::vector<Eigen::Index>;

/// Disjoint blocks covering every entry of a State.
using Partition = std::vector<Indices>;

Block gather(const State& x, const Indices& block);
void scatter(State& x, const Indices& block, const BlockRef& values);

/// Total Hamming distance between two states of equal shape.
int hamming_distance(const State& a, const State& b);

/// One block per column.
Partition column_partition(Eigen::Index rows, Eigen::Index cols);

/// Groups of `group` consecutive rows; each block holds the entries of those
/// rows across all columns. The final group may be smaller.
Partition row_partition(Eigen::Index rows, Eigen::Index cols, Eigen::Index group);

/// Contiguous chunks of size `block_size` of `order` (the last may be smaller).
Partition chunk_partition(const Indices& order, Eigen::Index block_size);

/// Uniformly random permutation of 0..n-1 cut into contiguous chunks.
Partition random_partition(Eigen::Index n, Eigen::Index block_size, Rng& rng);

std::vector<int> block_sizes(const Partition& partition);

/// Returns the column index when `block` is exactly column c of a
/// rows-row state in top-to-bottom order, else -1.
Eigen::Index block_as_column(const Indices& block, Eigen::Index rows);

/// True when the blocks are disjoint and cover all `n` entries.
bool is_partition(const Partition& partition, Eigen::Index n);

}  // namespace hbs

#endif  // HBS_STATE_HPP_
