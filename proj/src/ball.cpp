#include "hbs/ball.hpp"

#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

#include "hbs/error.hpp"
#include "hbs/numeric.hpp"

namespace hbs {

namespace {

// Pascal triangle grown on demand. Entries that overflow 64 bits are stored
// as 0, which is never a valid binomial coefficient.
class PascalTriangle {
 public:
  std::uint64_t get(int n, int k) {
    std::lock_guard<std::mutex> lock(mutex_);
    while (static_cast<int>(rows_.size()) <= n) grow();
    return rows_[n][k];
  }

 private:
  void grow() {
    const int n = static_cast<int>(rows_.size());
    std::vector<std::uint64_t> row(n + 1, 1);
    for (int k = 1; k < n; ++k) {
      const std::uint64_t a = rows_[n - 1][k - 1];
      const std::uint64_t b = rows_[n - 1][k];
      std::uint64_t sum = 0;
      row[k] = (a == 0 || b == 0 || __builtin_add_overflow(a, b, &sum)) ? 0 : sum;
    }
    rows_.push_back(std::move(row));
  }

  std::mutex mutex_;
  std::vector<std::vector<std::uint64_t>> rows_;
};

PascalTriangle& pascal() {
  static PascalTriangle table;
  return table;
}

void check_ball_args(int block_length, int alphabet_size, int radius) {
  HBS_REQUIRE(block_length >= 1, "block length must be >= 1");
  HBS_REQUIRE(alphabet_size >= 2, "alphabet size must be >= 2");
  HBS_REQUIRE(radius >= 0 && radius <= block_length,
              "radius must satisfy 0 <= m <= K (K=" + std::to_string(block_length) +
                  ", m=" + std::to_string(radius) + ")");
}

void check_symbols(const BlockRef& b, int alphabet_size) {
  HBS_REQUIRE(b.size() == 0 || (b.minCoeff() >= 0 && b.maxCoeff() < alphabet_size),
              "block symbol outside {0, ..., S-1}");
}

}  // namespace

int hamming_distance(const BlockRef& a, const BlockRef& b) {
  HBS_REQUIRE(a.size() == b.size(), "hamming_distance: blocks differ in length");
  return static_cast<int>((a.array() != b.array()).count());
}

int hamming_distance(const BlockRef& a, const BlockRef& b, int alphabet_size) {
  check_symbols(a, alphabet_size);
  check_symbols(b, alphabet_size);
  return hamming_distance(a, b);
}

std::uint64_t binomial(int n, int k) {
  HBS_REQUIRE(n >= 0, "binomial: n must be nonnegative");
  if (k < 0 || k > n) return 0;
  const std::uint64_t v = pascal().get(n, k);
  HBS_REQUIRE(v != 0, "binomial: C(" + std::to_string(n) + ", " + std::to_string(k) +
                          ") overflows 64 bits");
  return v;
}

double log_binomial(int n, int k) {
  HBS_REQUIRE(n >= 0 && k >= 0 && k <= n, "log_binomial: need 0 <= k <= n");
  if (n <= 60) return std::log(static_cast<double>(pascal().get(n, k)));
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::uint64_t ball_volume(int block_length, int alphabet_size, int radius) {
  check_ball_args(block_length, alphabet_size, radius);
  std::uint64_t total = 0;
  std::uint64_t power = 1;  // (S-1)^j
  for (int j = 0; j <= radius; ++j) {
    if (j > 0) {
      HBS_REQUIRE(!__builtin_mul_overflow(power, static_cast<std::uint64_t>(alphabet_size - 1),
                                          &power),
                  "ball_volume overflows 64 bits");
    }
    std::uint64_t term = 0;
    HBS_REQUIRE(!__builtin_mul_overflow(power, binomial(block_length, j), &term) &&
                    !__builtin_add_overflow(total, term, &total),
                "ball_volume overflows 64 bits");
  }
  return total;
}

Eigen::VectorXd log_distance_weights(int block_length, int alphabet_size, int radius,
                                     double lambda) {
  check_ball_args(block_length, alphabet_size, radius);
  HBS_REQUIRE(lambda >= 0.0, "lambda must be nonnegative");
  Eigen::VectorXd w(radius + 1);
  const double log_alt = std::log(static_cast<double>(alphabet_size - 1));
  w(0) = 0.0;
  for (int j = 1; j <= radius; ++j) {
    w(j) = -lambda * j + j * log_alt + log_binomial(block_length, j);
  }
  return w;
}

double log_weighted_ball_volume(int block_length, int alphabet_size, int radius,
                                double lambda) {
  return log_sum_exp(log_distance_weights(block_length, alphabet_size, radius, lambda));
}

double weighted_ball_volume(int block_length, int alphabet_size, int radius, double lambda) {
  check_ball_args(block_length, alphabet_size, radius);
  HBS_REQUIRE(lambda >= 0.0, "lambda must be nonnegative");
  if (block_length > 30) {
    return std::exp(log_weighted_ball_volume(block_length, alphabet_size, radius, lambda));
  }
  double total = 0.0;
  double power = 1.0;
  for (int j = 0; j <= radius; ++j) {
    if (j > 0) power *= alphabet_size - 1;
    const double decay = j == 0 ? 1.0 : std::exp(-lambda * j);
    total += decay * power * static_cast<double>(binomial(block_length, j));
  }
  return total;
}

BallStencil::BallStencil(int block_length, int alphabet_size, int radius)
    : block_length_(block_length), alphabet_size_(alphabet_size), radius_(radius) {
  const std::uint64_t volume = ball_volume(block_length, alphabet_size, radius);
  HBS_REQUIRE(volume <= (1ULL << 31), "Hamming ball too large to enumerate");
  offsets_.reserve(volume + 1);
  offsets_.push_back(0);

  const int alt_count = alphabet_size - 1;
  std::vector<int> subset;
  std::vector<int> alts;
  for (int j = 0; j <= radius; ++j) {
    subset.resize(j);
    std::iota(subset.begin(), subset.end(), 0);
    while (true) {
      // Every replacement tuple for this subset, last position varying fastest.
      alts.assign(j, 0);
      while (true) {
        for (int t = 0; t < j; ++t) {
          positions_.push_back(subset[t]);
          alternatives_.push_back(alts[t]);
        }
        offsets_.push_back(static_cast<int>(positions_.size()));
        int t = j - 1;
        while (t >= 0 && alts[t] == alt_count - 1) alts[t--] = 0;
        if (t < 0) break;
        ++alts[t];
      }
      // Next j-subset in lexicographic order.
      int t = j - 1;
      while (t >= 0 && subset[t] == block_length - j + t) --t;
      if (t < 0) break;
      ++subset[t];
      for (int s = t + 1; s < j; ++s) subset[s] = subset[s - 1] + 1;
    }
  }
}

void BallStencil::member(const BlockRef& center, Eigen::Index index,
                         Eigen::Ref<Eigen::VectorXi> out) const {
  out = center;
  for (int e = offsets_[index]; e < offsets_[index + 1]; ++e) {
    const int pos = positions_[e];
    const int alt = alternatives_[e];
    out(pos) = alt < center(pos) ? alt : alt + 1;
  }
}

Eigen::MatrixXi BallStencil::members(const BlockRef& center) const {
  HBS_REQUIRE(center.size() == block_length_, "ball center has the wrong length");
  check_symbols(center, alphabet_size_);
  Eigen::MatrixXi out(block_length_, size());
  for (Eigen::Index i = 0; i < size(); ++i) member(center, i, out.col(i));
  return out;
}

Eigen::MatrixXi enumerate_ball(const BlockRef& center, int alphabet_size, int radius) {
  return BallStencil(static_cast<int>(center.size()), alphabet_size, radius).members(center);
}

Block sample_in_ball(const BlockRef& center, int alphabet_size, int radius, double lambda,
                     Rng& rng) {
  const int k = static_cast<int>(center.size());
  check_symbols(center, alphabet_size);
  const Eigen::VectorXd logw = log_distance_weights(k, alphabet_size, radius, lambda);
  const int distance = static_cast<int>(sample_log_categorical(logw, rng));

  Block out = center;
  if (distance == 0) return out;
  // Partial Fisher-Yates: the first `distance` entries form a uniform subset.
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  for (int t = 0; t < distance; ++t) {
    const int pick = t + static_cast<int>(rng.uniform_int(k - t));
    std::swap(idx[t], idx[pick]);
    const int pos = idx[t];
    const int alt = static_cast<int>(rng.uniform_int(alphabet_size - 1));
    out(pos) = alt < center(pos) ? alt : alt + 1;
  }
  return out;
}

}  // namespace hbs
