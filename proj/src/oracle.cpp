#include "shapetweak/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shapetweak/errors.hpp"

namespace shapetweak {

Shapelet position_probe(std::size_t length, std::size_t position) {
  if (position >= length) {
    throw ContractViolation("probe position outside the series");
  }
  std::vector<double> v(length, 0.5);
  v[position] = 2.0;
  return Shapelet(std::move(v));
}

double position_threshold(std::size_t length) {
  return std::sqrt(static_cast<double>(length - 1) / 4.0 + 2.5);
}

ShapeletForest hitting_set_forest(const HittingSetInstance& instance) {
  const std::size_t n = instance.universe;
  if (n == 0 || instance.sets.empty()) {
    throw ContractViolation("hitting set instance needs a ground set and at least one subset");
  }
  // Labels sorted: "0" = index 0, "1" = index 1.
  constexpr std::uint32_t kZero = 0;
  constexpr std::uint32_t kOne = 1;
  const double theta = position_threshold(n);

  std::vector<ShapeletTree> trees;
  for (const auto& raw : instance.sets) {
    std::vector<std::size_t> set = raw;
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    if (set.empty() || set.back() >= n) {
      throw ContractViolation("subsets must be non-empty and inside the ground set");
    }
    // Element k: split at 2k, its "1" leaf at 2k+1, the > branch continues at 2k+2.
    std::vector<TreeNode> nodes;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const auto base = static_cast<std::uint32_t>(nodes.size());
      nodes.emplace_back(SplitNode{position_probe(n, set[k]), theta, base + 1, base + 2});
      nodes.emplace_back(LeafNode{kOne});
      if (k + 1 == set.size()) nodes.emplace_back(LeafNode{kZero});
    }
    trees.emplace_back(std::move(nodes), 2);
  }
  ForestParams params;
  params.n_trees = trees.size();
  params.shapelets_per_node = 1;
  params.min_shapelet_length = n;
  params.max_shapelet_length = n;
  params.bootstrap = false;
  return ShapeletForest(std::move(trees), {"0", "1"}, params);
}

std::optional<std::vector<std::size_t>> brute_force_min_changes(const ShapeletForest& forest,
                                                                const TimeSeries& series,
                                                                const std::string& desired,
                                                                std::size_t k) {
  const std::size_t n = series.size();
  if (n > kBruteForceMaxLength) {
    throw ContractViolation("brute force refused: length " + std::to_string(n) +
                            " exceeds the cap of " + std::to_string(kBruteForceMaxLength));
  }
  for (double v : series.values()) {
    if (v != 0.0 && v != 1.0) {
      throw ContractViolation("brute force needs a 0/1 series");
    }
  }
  const auto want = forest.label_index(desired);
  std::vector<double> work(series.values().begin(), series.values().end());

  for (std::size_t size = 0; size <= std::min(k, n); ++size) {
    // Lexicographic walk over size-`size` index combinations.
    std::vector<std::size_t> pick(size);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    while (true) {
      for (auto p : pick) work[p] = 1.0 - work[p];
      const bool hit = predict_index(forest, work) == want;
      for (auto p : pick) work[p] = 1.0 - work[p];
      if (hit) return pick;

      std::size_t i = size;
      while (i > 0 && pick[i - 1] == n - size + (i - 1)) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return std::nullopt;
}

std::size_t changed_positions(const TimeSeries& a, const TimeSeries& b, double e) {
  if (a.size() != b.size()) {
    throw ContractViolation("changed_positions: length mismatch");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > e) ++count;
  }
  return count;
}

}  // namespace shapetweak
