#ifndef HBS_RNG_HPP_
#define HBS_RNG_HPP_

#include <cstdint>
#include <random>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace hbs {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of the i-th independent stream derived from a run seed.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Random stream used by every sampler. The engine is mt19937_64 (its output
/// sequence is fixed by the standard) and all distributions come from
/// Boost.Random, so a seed reproduces the same draws on every platform.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(stream_seed(seed, index));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on {0, ..., n-1}; n > 0.
  std::int64_t uniform_int(std::int64_t n) {
    return boost::random::uniform_int_distribution<std::int64_t>(0, n - 1)(engine_);
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    return boost::random::normal_distribution<double>(mean, sd)(engine_);
  }

  /// Gamma with shape `shape` and unit scale.
  double gamma(double shape) {
    return boost::random::gamma_distribution<double>(shape, 1.0)(engine_);
  }

  double beta(double a, double b) {
    return boost::random::beta_distribution<double>(a, b)(engine_);
  }

  int binomial(int trials, double p) {
    return boost::random::binomial_distribution<int, double>(trials, p)(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  engine_type& engine() noexcept { return engine_; }

 private:
  engine_type engine_;
};

}  // namespace hbs

#endif  // HBS_RNG_HPP_
