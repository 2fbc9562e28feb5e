#include "hbs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "hbs/ball.hpp"
#include "hbs/error.hpp"
#include "hbs/numeric.hpp"

namespace hbs {

namespace {

Eigen::Index checked_power(Eigen::Index base, Eigen::Index exponent, Eigen::Index cap) {
  Eigen::Index out = 1;
  for (Eigen::Index i = 0; i < exponent; ++i) {
    if (out > cap / base) return cap + 1;
    out *= base;
  }
  return out;
}

// All S^K blocks of length K, block t as column t, first entry fastest.
Eigen::MatrixXi all_blocks(int length, int alphabet_size) {
  const Eigen::Index count = checked_power(alphabet_size, length, 1 << 24);
  HBS_REQUIRE(count <= (1 << 24), "block space too large to enumerate");
  Eigen::MatrixXi out(length, count);
  for (Eigen::Index t = 0; t < count; ++t) {
    Eigen::Index code = t;
    for (int r = 0; r < length; ++r) {
      out(r, t) = static_cast<int>(code % alphabet_size);
      code /= alphabet_size;
    }
  }
  return out;
}

int block_distance(const State& a, const State& b, const Indices& block) {
  int d = 0;
  for (Eigen::Index k : block) d += a(k) != b(k);
  return d;
}

// Row-wise normalization of log weights into probabilities.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& log_weights) {
  Eigen::MatrixXd out(log_weights.rows(), log_weights.cols());
  for (Eigen::Index i = 0; i < log_weights.rows(); ++i) {
    const double lse = log_sum_exp(log_weights.row(i));
    HBS_REQUIRE(std::isfinite(lse), "kernel row has no reachable state with positive mass");
    out.row(i) = (log_weights.row(i).array() - lse).exp();
  }
  return out;
}

struct KernelContext {
  const ExactTable& table;
  std::vector<State> states;
  Eigen::VectorXd log_pi;
  int alphabet_size;
};

Eigen::MatrixXd hb_kernel(const KernelContext& ctx, const Partition& partition,
                          const std::vector<int>& radii, double lambda) {
  const Eigen::Index n = static_cast<Eigen::Index>(ctx.states.size());
  // log_aux(x, u) = log of the unnormalized auxiliary weight; -inf outside the ball.
  Eigen::MatrixXd log_aux = Eigen::MatrixXd::Constant(n, n, kNegInf);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      int total = 0;
      bool inside = true;
      for (std::size_t i = 0; i < partition.size() && inside; ++i) {
        const int d = block_distance(ctx.states[a], ctx.states[b], partition[i]);
        inside = d <= radii[i];
        total += d;
      }
      if (inside) log_aux(a, b) = -lambda * total;
    }
  }
  const Eigen::MatrixXd aux = normalize_rows(log_aux);
  Eigen::MatrixXd log_slice = log_aux;
  for (Eigen::Index u = 0; u < n; ++u) log_slice.row(u) += ctx.log_pi.transpose();
  return aux * normalize_rows(log_slice);
}

Eigen::MatrixXd hb_block_update_kernel(const KernelContext& ctx, const Indices& block, int radius,
                                       double lambda) {
  const Eigen::Index n = static_cast<Eigen::Index>(ctx.states.size());
  const int length = static_cast<int>(block.size());
  const Eigen::MatrixXi values = all_blocks(length, ctx.alphabet_size);
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const State& x = ctx.states[a];
    Eigen::VectorXi current(length);
    for (int t = 0; t < length; ++t) current(t) = x(block[t]);
    // Every replacement of the block and its table index.
    std::vector<Eigen::Index> target(values.cols());
    State work = x;
    for (Eigen::Index v = 0; v < values.cols(); ++v) {
      for (int t = 0; t < length; ++t) work(block[t]) = values(t, v);
      target[v] = ctx.table.index(work);
    }
    Eigen::VectorXd log_u(values.cols());
    for (Eigen::Index u = 0; u < values.cols(); ++u) {
      const int d = (values.col(u) - current).cwiseAbs().cwiseMin(1).sum();
      log_u(u) = d <= radius ? -lambda * d : kNegInf;
    }
    log_u.array() -= log_sum_exp(log_u);
    for (Eigen::Index u = 0; u < values.cols(); ++u) {
      if (!std::isfinite(log_u(u))) continue;
      Eigen::VectorXd log_x(values.cols());
      for (Eigen::Index v = 0; v < values.cols(); ++v) {
        const int d = (values.col(v) - values.col(u)).cwiseAbs().cwiseMin(1).sum();
        log_x(v) = d <= radius ? ctx.log_pi(target[v]) - lambda * d : kNegInf;
      }
      const double lse = log_sum_exp(log_x);
      HBS_REQUIRE(std::isfinite(lse), "block slice has no state with positive mass");
      for (Eigen::Index v = 0; v < values.cols(); ++v) {
        if (std::isfinite(log_x(v))) kernel(a, target[v]) += std::exp(log_u(u) + log_x(v) - lse);
      }
    }
  }
  return kernel;
}

Eigen::MatrixXd pure_mh_kernel(const KernelContext& ctx, const Partition& partition,
                               const std::vector<int>& radii) {
  const Eigen::Index n = static_cast<Eigen::Index>(ctx.states.size());
  std::vector<std::vector<Eigen::Index>> neighbors(n);
  Eigen::VectorXd log_z(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      bool inside = true;
      for (std::size_t i = 0; i < partition.size() && inside; ++i) {
        inside = block_distance(ctx.states[a], ctx.states[b], partition[i]) <= radii[i];
      }
      if (inside) neighbors[a].push_back(b);
    }
    Eigen::VectorXd terms(static_cast<Eigen::Index>(neighbors[a].size()));
    for (std::size_t t = 0; t < neighbors[a].size(); ++t) terms(t) = ctx.log_pi(neighbors[a][t]);
    log_z(a) = log_sum_exp(terms);
  }
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    double moved = 0.0;
    for (Eigen::Index b : neighbors[a]) {
      if (b == a) continue;
      const double propose = std::exp(ctx.log_pi(b) - log_z(a));
      const double accept = std::min(1.0, std::exp(log_z(a) - log_z(b)));
      kernel(a, b) = propose * accept;
      moved += kernel(a, b);
    }
    kernel(a, a) = 1.0 - moved;
  }
  return kernel;
}

Eigen::MatrixXd block_gibbs_kernel(const KernelContext& ctx, const Indices& block) {
  return single_block_gibbs_kernel(ctx.table, block);
}

}  // namespace

ExactTable::ExactTable(Eigen::Index rows, Eigen::Index cols, int alphabet_size)
    : rows_(rows), cols_(cols), alphabet_size_(alphabet_size) {
  HBS_REQUIRE(rows >= 1 && cols >= 1, "table needs a nonempty state");
  HBS_REQUIRE(alphabet_size >= 2, "alphabet needs at least two symbols");
  const Eigen::Index per_column = checked_power(alphabet_size, rows, 1 << 24);
  HBS_REQUIRE(per_column <= (1 << 24), "column space too large to enumerate");
  const BallStencil stencil(static_cast<int>(rows), alphabet_size, static_cast<int>(rows));
  column_values_ = stencil.members(Eigen::VectorXi::Zero(rows));
  column_rank_.assign(per_column, -1);
  for (Eigen::Index t = 0; t < column_values_.cols(); ++t) {
    Eigen::Index code = 0;
    for (Eigen::Index r = rows - 1; r >= 0; --r) code = code * alphabet_size + column_values_(r, t);
    column_rank_[code] = t;
  }
  size_ = checked_power(per_column, cols, std::numeric_limits<Eigen::Index>::max() / 2);
  HBS_REQUIRE(size_ <= std::numeric_limits<Eigen::Index>::max() / 2, "state space too large");
}

State ExactTable::state(Eigen::Index index) const {
  HBS_REQUIRE(index >= 0 && index < size(), "table index out of range");
  const Eigen::Index per_column = column_values_.cols();
  State x(rows_, cols_);
  for (Eigen::Index c = cols_ - 1; c >= 0; --c) {
    x.col(c) = column_values_.col(index % per_column);
    index /= per_column;
  }
  return x;
}

Eigen::Index ExactTable::index(const State& x) const {
  HBS_REQUIRE(x.rows() == rows_ && x.cols() == cols_, "state has the wrong shape");
  const Eigen::Index per_column = column_values_.cols();
  Eigen::Index out = 0;
  for (Eigen::Index c = 0; c < cols_; ++c) {
    Eigen::Index code = 0;
    for (Eigen::Index r = rows_ - 1; r >= 0; --r) {
      HBS_REQUIRE(x(r, c) >= 0 && x(r, c) < alphabet_size_, "symbol outside the alphabet");
      code = code * alphabet_size_ + x(r, c);
    }
    out = out * per_column + column_rank_[code];
  }
  return out;
}

void ExactTable::set_log_density(Eigen::VectorXd log_density) {
  HBS_REQUIRE(log_density.size() == size_, "one log density per state required");
  log_density_ = std::move(log_density);
  log_normalizer_ = log_sum_exp(log_density_);
  HBS_REQUIRE(std::isfinite(log_normalizer_), "table has no state with positive finite mass");
  probabilities_ = (log_density_.array() - log_normalizer_).exp();
}

ExactTable exact_posterior(const ModelTarget& model, std::uint64_t bound) {
  const Eigen::Index per_column =
      checked_power(model.alphabet_size(), model.rows(), static_cast<Eigen::Index>(bound));
  const Eigen::Index total =
      checked_power(per_column, model.cols(), static_cast<Eigen::Index>(bound));
  if (per_column > static_cast<Eigen::Index>(bound) || total > static_cast<Eigen::Index>(bound)) {
    throw ContractError(fmt::format(
        "state space of {} x {} entries over {} symbols exceeds the oracle bound of {} "
        "configurations",
        model.rows(), model.cols(), model.alphabet_size(), bound));
  }
  ExactTable table(model.rows(), model.cols(), model.alphabet_size());
  Eigen::VectorXd log_density(total);
  for (Eigen::Index i = 0; i < total; ++i) log_density(i) = model.log_joint(table.state(i));
  table.set_log_density(std::move(log_density));
  return table;
}

Eigen::MatrixXd exact_marginals(const ExactTable& table) {
  const Eigen::Index entries = table.rows() * table.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(entries, table.alphabet_size());
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    const State x = table.state(i);
    const double p = table.probabilities()(i);
    for (Eigen::Index e = 0; e < entries; ++e) out(e, x(e)) += p;
  }
  return out;
}

Eigen::VectorXd inclusion_probabilities(const ExactTable& table) {
  HBS_REQUIRE(table.alphabet_size() == 2, "inclusion probabilities need a binary table");
  return exact_marginals(table).col(1);
}

Eigen::MatrixXd single_block_gibbs_kernel(const ExactTable& table, const Indices& block) {
  const Eigen::Index n = table.size();
  const int length = static_cast<int>(block.size());
  const Eigen::MatrixXi values = all_blocks(length, table.alphabet_size());
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    State work = table.state(a);
    std::vector<Eigen::Index> target(values.cols());
    Eigen::VectorXd log_w(values.cols());
    for (Eigen::Index v = 0; v < values.cols(); ++v) {
      for (int t = 0; t < length; ++t) work(block[t]) = values(t, v);
      target[v] = table.index(work);
      log_w(v) = table.log_density()(target[v]);
    }
    const double lse = log_sum_exp(log_w);
    HBS_REQUIRE(std::isfinite(lse), "block conditional has no state with positive mass");
    for (Eigen::Index v = 0; v < values.cols(); ++v) {
      kernel(a, target[v]) += std::exp(log_w(v) - lse);
    }
  }
  return kernel;
}

std::vector<std::pair<Partition, double>> partition_distribution(const SamplerConfig& config,
                                                                 const ModelTarget& model) {
  const Eigen::Index rows = model.rows();
  const Eigen::Index cols = model.cols();
  if (model.structure() != Structure::kUnstructured) {
    Partition blocks;
    if (config.axis == BlockAxis::kRows) {
      HBS_REQUIRE(config.block_size >= 1, "row group size must be positive");
      for (Eigen::Index r0 = 0; r0 < rows; r0 += config.block_size) {
        Indices block;
        for (Eigen::Index r = r0; r < std::min<Eigen::Index>(rows, r0 + config.block_size); ++r) {
          for (Eigen::Index c = 0; c < cols; ++c) block.push_back(c * rows + r);
        }
        blocks.push_back(std::move(block));
      }
    } else {
      for (Eigen::Index c = 0; c < cols; ++c) {
        Indices block;
        for (Eigen::Index r = 0; r < rows; ++r) block.push_back(c * rows + r);
        blocks.push_back(std::move(block));
      }
    }
    return {{blocks, 1.0}};
  }
  const Eigen::Index size = rows * cols;
  HBS_REQUIRE(size <= 10, "exact partition averaging is limited to 10 entries");
  HBS_REQUIRE(config.block_size >= 1, "block size must be positive");
  Indices order(size);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::map<Partition, double> counts;
  double permutations = 0.0;
  do {
    Partition blocks;
    for (Eigen::Index start = 0; start < size; start += config.block_size) {
      Indices block(order.begin() + start,
                    order.begin() + std::min<Eigen::Index>(size, start + config.block_size));
      std::sort(block.begin(), block.end());
      blocks.push_back(std::move(block));
    }
    counts[blocks] += 1.0;
    permutations += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  std::vector<std::pair<Partition, double>> out;
  for (auto& [blocks, count] : counts) out.emplace_back(blocks, count / permutations);
  return out;
}

std::vector<std::pair<std::vector<int>, double>> radius_distribution(
    const BallSpec& spec, const std::vector<int>& block_sizes) {
  const std::size_t p = block_sizes.size();
  switch (spec.distribution) {
    case RadiusDistribution::kFixed:
      return {{spec.radii_for(block_sizes), 1.0}};
    case RadiusDistribution::kGibbsMimic: {
      std::vector<std::pair<std::vector<int>, double>> out;
      for (std::size_t i = 0; i < p; ++i) {
        std::vector<int> radii(p, 0);
        radii[i] = block_sizes[i];
        out.emplace_back(std::move(radii), 1.0 / static_cast<double>(p));
      }
      return out;
    }
    case RadiusDistribution::kPerBlockCategorical: {
      const double total = std::accumulate(spec.radius_probs.begin(), spec.radius_probs.end(), 0.0);
      HBS_REQUIRE(total > 0.0, "radius probabilities must have positive total");
      std::map<std::vector<int>, double> mass;
      std::vector<std::size_t> choice(p, 0);
      const std::size_t options = spec.radius_probs.size();
      while (true) {
        std::vector<int> radii(p);
        double prob = 1.0;
        for (std::size_t i = 0; i < p; ++i) {
          radii[i] = std::min(static_cast<int>(choice[i]), block_sizes[i]);
          prob *= spec.radius_probs[choice[i]] / total;
        }
        if (prob > 0.0) mass[radii] += prob;
        std::size_t i = 0;
        while (i < p && ++choice[i] == options) choice[i++] = 0;
        if (i == p) break;
      }
      return {mass.begin(), mass.end()};
    }
  }
  throw ContractError("unknown radius distribution");
}

Eigen::MatrixXd exact_kernel(const SamplerConfig& config, const ModelTarget& model,
                             const ExactTable& table, Eigen::Index bound) {
  HBS_REQUIRE(table.size() <= bound, "exact kernels are limited to small state spaces");
  HBS_REQUIRE(table.rows() == model.rows() && table.cols() == model.cols() &&
                  table.alphabet_size() == model.alphabet_size(),
              "table does not match the model");
  KernelContext ctx{table, {}, table.log_density(), table.alphabet_size()};
  for (Eigen::Index i = 0; i < table.size(); ++i) ctx.states.push_back(table.state(i));
  const Eigen::Index n = table.size();
  const double lambda = config.ball.lambda;

  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [partition, p_partition] : partition_distribution(config, model)) {
    std::vector<int> sizes;
    for (const auto& block : partition) sizes.push_back(static_cast<int>(block.size()));
    if (config.scheme == Scheme::kBlockGibbs) {
      Eigen::MatrixXd sweep = Eigen::MatrixXd::Identity(n, n);
      for (const auto& block : partition) sweep = sweep * block_gibbs_kernel(ctx, block);
      kernel += p_partition * sweep;
      continue;
    }
    for (const auto& [radii, p_radii] : radius_distribution(config.ball, sizes)) {
      Eigen::MatrixXd step;
      switch (config.scheme) {
        case Scheme::kHb:
          step = hb_kernel(ctx, partition, radii, lambda);
          break;
        case Scheme::kHbBlock:
          step = Eigen::MatrixXd::Identity(n, n);
          for (std::size_t i = 0; i < partition.size(); ++i) {
            step = step * hb_block_update_kernel(ctx, partition[i], radii[i], lambda);
          }
          break;
        case Scheme::kPureMh:
          step = pure_mh_kernel(ctx, partition, radii);
          break;
        case Scheme::kBlockGibbs:
          break;
      }
      kernel += p_partition * p_radii * step;
    }
  }
  return kernel;
}

void write_table_csv(std::ostream& out, const ExactTable& table) {
  out << fmt::format("# rows={} cols={} alphabet={}\n", table.rows(), table.cols(),
                     table.alphabet_size());
  out << "index,state,log_density,probability\n";
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    const State x = table.state(i);
    std::string symbols;
    for (Eigen::Index e = 0; e < x.size(); ++e) {
      if (e > 0) symbols += ';';
      symbols += std::to_string(x(e));
    }
    out << fmt::format("{},{},{},{}\n", i, symbols, table.log_density()(i),
                       table.probabilities()(i));
  }
}

ExactTable read_table_csv(std::istream& in) {
  std::string line;
  long rows = 0;
  long cols = 0;
  int alphabet = 0;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# rows=%ld cols=%ld alphabet=%d", &rows, &cols, &alphabet) != 3) {
    throw ContractError("table CSV must start with '# rows=R cols=C alphabet=S'");
  }
  if (!std::getline(in, line) || line != "index,state,log_density,probability") {
    throw ContractError("table CSV has an unexpected header");
  }
  ExactTable table(rows, cols, alphabet);
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string index;
    std::string symbols;
    std::string density;
    std::getline(fields, index, ',');
    std::getline(fields, symbols, ',');
    std::getline(fields, density, ',');
    const auto i = static_cast<Eigen::Index>(std::stoll(index));
    HBS_REQUIRE(i == static_cast<Eigen::Index>(values.size()), "table rows out of order");
    const State expected = table.state(i);
    std::stringstream entries(symbols);
    std::string symbol;
    Eigen::Index e = 0;
    while (std::getline(entries, symbol, ';')) {
      HBS_REQUIRE(e < expected.size() && std::stoi(symbol) == expected(e),
                  "table state does not match canonical order at row " + index);
      ++e;
    }
    HBS_REQUIRE(e == expected.size(), "table state has the wrong length at row " + index);
    values.push_back(std::stod(density));
  }
  table.set_log_density(Eigen::Map<Eigen::VectorXd>(values.data(),
                                                     static_cast<Eigen::Index>(values.size())));
  return table;
}

}  // namespace hbs
