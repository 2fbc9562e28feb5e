#ifndef HBS_BALL_HPP_
#define HBS_BALL_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hbs/rng.hpp"

namespace hbs {

/// A block of symbols in {0, ..., S-1}.
using Block = Eigen::VectorXi;
using BlockRef = Eigen::Ref<const Eigen::VectorXi>;

/// Number of positions where `a` and `b` differ. Throws ContractError on a
/// length mismatch.
int hamming_distance(const BlockRef& a, const BlockRef& b);

/// As above, additionally checking that both blocks only use symbols < S.
int hamming_distance(const BlockRef& a, const BlockRef& b, int alphabet_size);

/// Binomial coefficient C(n, k) from a shared Pascal-triangle cache. Throws
/// ContractError if the value does not fit in 64 bits.
std::uint64_t binomial(int n, int k);

/// log C(n, k), exact for any n (uses lgamma beyond the cached range).
double log_binomial(int n, int k);

/// |H_m(x)| = sum_{j<=m} (S-1)^j C(K, j) for a block of length K over S symbols.
/// Integer arithmetic; throws ContractError on overflow or invalid arguments.
std::uint64_t ball_volume(int block_length, int alphabet_size, int radius);

/// sum_{j<=m} exp(-lambda j) (S-1)^j C(K, j). Summed in the log domain when
/// K > 30.
double weighted_ball_volume(int block_length, int alphabet_size, int radius, double lambda);

/// log of weighted_ball_volume, finite for any K.
double log_weighted_ball_volume(int block_length, int alphabet_size, int radius, double lambda);

/// Unnormalized log probability of drawing a member at each distance
/// j = 0..m: -lambda j + j log(S-1) + log C(K, j).
Eigen::VectorXd log_distance_weights(int block_length, int alphabet_size, int radius,
                                     double lambda);

/// Center-independent description of every member of a Hamming ball of
/// radius m around a length-K block, in canonical order: ascending distance,
/// then lexicographic position subsets, then lexicographic replacement values.
///
/// A member is stored as a list of (position, alternative) pairs; alternative
/// a in {0..S-2} denotes the a-th symbol of {0..S-1} \ {center[position]} in
/// ascending order, which makes the replacement order independent of the center.
class BallStencil {
 public:
  BallStencil(int block_length, int alphabet_size, int radius);

  int block_length() const noexcept { return block_length_; }
  int alphabet_size() const noexcept { return alphabet_size_; }
  int radius() const noexcept { return radius_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(offsets_.size()) - 1; }

  /// Distance from the center of member `index`.
  int distance(Eigen::Index index) const noexcept {
    return offsets_[index + 1] - offsets_[index];
  }

  /// Writes member `index` of the ball around `center` into `out`.
  void member(const BlockRef& center, Eigen::Index index, Eigen::Ref<Eigen::VectorXi> out) const;

  /// All members as the columns of a K x M matrix.
  Eigen::MatrixXi members(const BlockRef& center) const;

 private:
  int block_length_;
  int alphabet_size_;
  int radius_;
  std::vector<int> offsets_;    // member i uses [offsets_[i], offsets_[i+1])
  std::vector<int> positions_;
  std::vector<int> alternatives_;
};

/// Every block within distance m of `center`, one per column, canonical order.
Eigen::MatrixXi enumerate_ball(const BlockRef& center, int alphabet_size, int radius);

/// Exact draw from p(u | center) proportional to exp(-lambda d(u, center)) on
/// H_m(center): a distance, then a uniform position subset of that size, then
/// uniform replacement symbols.
Block sample_in_ball(const BlockRef& center, int alphabet_size, int radius, double lambda,
                     Rng& rng);

}  // namespace hbs

#endif  // HBS_BALL_HPP_
