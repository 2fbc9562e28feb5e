#ifndef HBS_ERROR_HPP_
#define HBS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace hbs {

/// Violated precondition of a library call (bad sizes, out-of-range symbols).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid or inconsistent sampler / model configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every candidate of a categorical draw had zero (or non-finite) weight.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, long block = -1)
      : std::runtime_error(what), block_(block) {}
  long block() const noexcept { return block_; }

 private:
  long block_;
};

#define HBS_REQUIRE(cond, msg)                  \
  do {                                          \
    if (!(cond)) throw ::hbs::ContractError(msg); \
  } while (0)

}  // namespace hbs

#endif  // HBS_ERROR_HPP_
