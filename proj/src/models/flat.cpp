#include "hbs/models/flat.hpp"

#include "hbs/error.hpp"

namespace hbs {

FlatModel::FlatModel(Eigen::Index rows, Eigen::Index cols, int alphabet_size)
    : rows_(rows), cols_(cols), alphabet_size_(alphabet_size) {
  HBS_REQUIRE(rows >= 1 && cols >= 1, "flat model needs a nonempty state");
  HBS_REQUIRE(alphabet_size >= 2, "alphabet needs at least two symbols");
}

}  // namespace hbs
