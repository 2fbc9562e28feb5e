#include "hbs/state.hpp"

#include <algorithm>
#include <numeric>

#include "hbs/error.hpp"

namespace hbs {

Block gather(const State& x, const Indices& block) {
  Block out(static_cast<Eigen::Index>(block.size()));
  const int* data = x.data();
  for (std::size_t t = 0; t < block.size(); ++t) out(t) = data[block[t]];
  return out;
}

void scatter(State& x, const Indices& block, const BlockRef& values) {
  HBS_REQUIRE(values.size() == static_cast<Eigen::Index>(block.size()),
              "scatter: value count does not match block size");
  int* data = x.data();
  for (std::size_t t = 0; t < block.size(); ++t) data[block[t]] = values(t);
}

int hamming_distance(const State& a, const State& b) {
  HBS_REQUIRE(a.rows() == b.rows() && a.cols() == b.cols(),
              "hamming_distance: states differ in shape");
  return static_cast<int>((a.array() != b.array()).count());
}

Partition column_partition(Eigen::Index rows, Eigen::Index cols) {
  Partition p(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    p[c].resize(rows);
    std::iota(p[c].begin(), p[c].end(), c * rows);
  }
  return p;
}

Partition row_partition(Eigen::Index rows, Eigen::Index cols, Eigen::Index group) {
  HBS_REQUIRE(group >= 1, "row group size must be >= 1");
  Partition p;
  for (Eigen::Index r0 = 0; r0 < rows; r0 += group) {
    Indices block;
    const Eigen::Index r1 = std::min(rows, r0 + group);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = r0; r < r1; ++r) block.push_back(r + c * rows);
    p.push_back(std::move(block));
  }
  return p;
}

Partition chunk_partition(const Indices& order, Eigen::Index block_size) {
  HBS_REQUIRE(block_size >= 1, "block size must be >= 1");
  Partition p;
  for (std::size_t start = 0; start < order.size(); start += block_size) {
    const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(block_size));
    p.emplace_back(order.begin() + start, order.begin() + stop);
  }
  return p;
}

Partition random_partition(Eigen::Index n, Eigen::Index block_size, Rng& rng) {
  Indices order(n);
  std::iota(order.begin(), order.end(), 0);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.uniform_int(i + 1)]);
  }
  return chunk_partition(order, block_size);
}

std::vector<int> block_sizes(const Partition& partition) {
  std::vector<int> sizes;
  sizes.reserve(partition.size());
  for (const auto& b : partition) sizes.push_back(static_cast<int>(b.size()));
  return sizes;
}

Eigen::Index block_as_column(const Indices& block, Eigen::Index rows) {
  if (static_cast<Eigen::Index>(block.size()) != rows || rows == 0) return -1;
  if (block.front() % rows != 0) return -1;
  for (Eigen::Index r = 1; r < rows; ++r)
    if (block[r] != block[0] + r) return -1;
  return block.front() / rows;
}

bool is_partition(const Partition& partition, Eigen::Index n) {
  std::vector<char> seen(n, 0);
  Eigen::Index count = 0;
  for (const auto& block : partition) {
    for (Eigen::Index i : block) {
      if (i < 0 || i >= n || seen[i]) return false;
      seen[i] = 1;
      ++count;
    }
  }
  return count == n;
}

}  // namespace hbs
