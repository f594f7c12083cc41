#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shapetweak/parallel.hpp"
#include "shapetweak/series.hpp"

namespace shapetweak {

/// Which side of a split a path follows. The underlying value is the sign used
/// when offsetting a transformed window from the threshold sphere.
enum class Direction : int { less_equal = -1, greater = +1 };

constexpr int sign(Direction d) noexcept { return static_cast<int>(d); }

/// One node of a decision path: the series must have its best-match distance
/// to `shapelet` on the `direction` side of `threshold`.
struct PathCondition {
  Shapelet shapelet;
  double threshold = 0.0;
  Direction direction = Direction::less_equal;

  friend bool operator==(const PathCondition&, const PathCondition&) = default;
};

/// Root-to-leaf rule of one tree. `path_index` is the leaf's ordinal in a
/// depth-first walk that visits the greater-than child first.
struct DecisionPath {
  std::vector<PathCondition> conditions;
  std::string label;
  std::size_t tree_index = 0;
  std::size_t path_index = 0;
};

/// Branch test of a single condition. The less-equal branch holds iff
/// d_s <= theta, the greater branch iff d_s > theta; equivalently
/// (theta - d_s) * direction <= 0 with direction = -1 for less-equal.
bool condition_test(std::span<const double> series, const PathCondition& condition);
bool condition_test(const TimeSeries& series, const PathCondition& condition);

struct SplitNode {
  Shapelet shapelet;
  double threshold = 0.0;
  std::uint32_t left = 0;   // d_s <= threshold
  std::uint32_t right = 0;  // d_s > threshold

  friend bool operator==(const SplitNode&, const SplitNode&) = default;
};

struct LeafNode {
  std::uint32_t label = 0;  // index into the forest label set

  friend bool operator==(const LeafNode&, const LeafNode&) = default;
};

using TreeNode = std::variant<SplitNode, LeafNode>;

/// Binary shapelet tree stored as a flat node array with the root at 0.
class ShapeletTree {
public:
  /// Validates child offsets (in range, no sharing, no cycles) and leaf label
  /// indices against `label_count`.
  ShapeletTree(std::vector<TreeNode> nodes, std::size_t label_count);

  std::span<const TreeNode> nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const noexcept;
  std::size_t depth() const noexcept;
  std::size_t max_shapelet_length() const noexcept;

  /// Label index of the leaf the series reaches.
  std::uint32_t predict(std::span<const double> series) const;

  /// All root-to-leaf condition lists with their leaf label index, in path order.
  std::vector<std::pair<std::vector<PathCondition>, std::uint32_t>> paths() const;

  friend bool operator==(const ShapeletTree&, const ShapeletTree&) = default;

private:
  std::vector<TreeNode> nodes_;
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t shapelets_per_node = 100;
  std::size_t min_shapelet_length = 2;
  std::size_t max_shapelet_length = 0;  // 0: up to the shortest training series
  std::uint64_t seed = 0;
  bool bootstrap = true;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Majority-vote ensemble of shapelet trees. Labels are kept sorted
/// (byte-wise string order); vote ties go to the earliest label in that order.
class ShapeletForest {
public:
  ShapeletForest(std::vector<ShapeletTree> trees, std::vector<std::string> labels,
                 ForestParams params);

  std::span<const ShapeletTree> trees() const noexcept { return trees_; }
  std::span<const std::string> labels() const noexcept { return labels_; }
  const ForestParams& params() const noexcept { return params_; }
  std::size_t max_shapelet_length() const noexcept { return max_shapelet_length_; }

  /// Throws ContractViolation for a label not seen at training.
  std::uint32_t label_index(const std::string& label) const;
  bool has_label(const std::string& label) const noexcept;

  friend bool operator==(const ShapeletForest&, const ShapeletForest&) = default;

private:
  std::vector<ShapeletTree> trees_;
  std::vector<std::string> labels_;
  ForestParams params_;
  std::size_t max_shapelet_length_ = 0;
};

/// Grows `params.n_trees` trees, each on its own bootstrap sample with an RNG
/// stream derived from (seed, tree index); serial and parallel execution give
/// identical forests. Throws TrainingError on empty or single-class data.
ShapeletForest train(std::span<const LabeledSeries> data, const ForestParams& params,
                     Execution exec = Execution::parallel);

std::uint32_t predict_index(const ShapeletForest& forest, std::span<const double> series);
const std::string& predict(const ShapeletForest& forest, std::span<const double> series);
const std::string& predict(const ShapeletForest& forest, const TimeSeries& series);

/// Per-label vote counts, indexed like forest.labels().
std::vector<std::size_t> vote_counts(const ShapeletForest& forest,
                                     std::span<const double> series);

std::vector<std::string> predict_batch(const ShapeletForest& forest,
                                       std::span<const TimeSeries> series,
                                       Execution exec = Execution::parallel);

/// Every path ending in a leaf labeled `label`, ordered by (tree, path).
/// Single-leaf trees contribute nothing.
std::vector<DecisionPath> extract_paths(const ShapeletForest& forest, const std::string& label);

}  // namespace shapetweak
