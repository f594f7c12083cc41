#include "shapetweak/forest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "shapetweak/errors.hpp"

namespace shapetweak {

bool condition_test(std::span<const double> series, const PathCondition& condition) {
  const double d = subsequence_distance(condition.shapelet.values(), series).distance;
  return condition.direction == Direction::less_equal ? d <= condition.threshold
                                                      : d > condition.threshold;
}

bool condition_test(const TimeSeries& series, const PathCondition& condition) {
  return condition_test(series.values(), condition);
}

// ---------------------------------------------------------------------------
// ShapeletTree

ShapeletTree::ShapeletTree(std::vector<TreeNode> nodes, std::size_t label_count)
    : nodes_(std::move(nodes)) {
  if (nodes_.empty()) {
    throw ContractViolation("shapelet tree needs at least one node");
  }
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::uint32_t> stack{0};
  std::size_t reached = 0;
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    if (seen[id]) {
      throw ContractViolation("shapelet tree node " + std::to_string(id) + " reached twice");
    }
    seen[id] = true;
    ++reached;
    if (const auto* split = std::get_if<SplitNode>(&nodes_[id])) {
      if (!(split->threshold >= 0.0) || !std::isfinite(split->threshold)) {
        throw ContractViolation("split threshold must be finite and non-negative");
      }
      for (std::uint32_t child : {split->left, split->right}) {
        if (child >= nodes_.size() || child == 0) {
          throw ContractViolation("split child offset out of range");
        }
        stack.push_back(child);
      }
    } else if (std::get<LeafNode>(nodes_[id]).label >= label_count) {
      throw ContractViolation("leaf label index out of range");
    }
  }
  if (reached != nodes_.size()) {
    throw ContractViolation("shapelet tree has unreachable nodes");
  }
}

std::size_t ShapeletTree::leaf_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return std::holds_alternative<LeafNode>(n); }));
}

std::size_t ShapeletTree::depth() const noexcept {
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (const auto* split = std::get_if<SplitNode>(&nodes_[id])) {
      stack.emplace_back(split->left, d + 1);
      stack.emplace_back(split->right, d + 1);
    }
  }
  return best;
}

std::size_t ShapeletTree::max_shapelet_length() const noexcept {
  std::size_t best = 0;
  for (const auto& n : nodes_) {
    if (const auto* split = std::get_if<SplitNode>(&n)) {
      best = std::max(best, split->shapelet.size());
    }
  }
  return best;
}

std::uint32_t ShapeletTree::predict(std::span<const double> series) const {
  std::uint32_t id = 0;
  while (const auto* split = std::get_if<SplitNode>(&nodes_[id])) {
    const double d = subsequence_distance(split->shapelet.values(), series).distance;
    id = d <= split->threshold ? split->left : split->right;
  }
  return std::get<LeafNode>(nodes_[id]).label;
}

std::vector<std::pair<std::vector<PathCondition>, std::uint32_t>> ShapeletTree::paths() const {
  std::vector<std::pair<std::vector<PathCondition>, std::uint32_t>> out;
  std::vector<PathCondition> prefix;

  // Greater-than child first, so a root whose right child is a leaf yields
  // that single-condition path as path 0.
  auto walk = [&](auto&& self, std::uint32_t id) -> void {
    if (const auto* split = std::get_if<SplitNode>(&nodes_[id])) {
      prefix.push_back({split->shapelet, split->threshold, Direction::greater});
      self(self, split->right);
      prefix.back().direction = Direction::less_equal;
      self(self, split->left);
      prefix.pop_back();
    } else {
      out.emplace_back(prefix, std::get<LeafNode>(nodes_[id]).label);
    }
  };
  walk(walk, 0);
  return out;
}

// ---------------------------------------------------------------------------
// ShapeletForest

ShapeletForest::ShapeletForest(std::vector<ShapeletTree> trees, std::vector<std::string> labels,
                               ForestParams params)
    : trees_(std::move(trees)), labels_(std::move(labels)), params_(params) {
  if (trees_.empty()) {
    throw ContractViolation("forest needs at least one tree");
  }
  if (labels_.empty()) {
    throw ContractViolation("forest needs a non-empty label set");
  }
  if (!std::is_sorted(labels_.begin(), labels_.end()) ||
      std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end()) {
    throw ContractViolation("forest labels must be sorted and unique");
  }
  for (const auto& tree : trees_) {
    for (const auto& node : tree.nodes()) {
      if (const auto* leaf = std::get_if<LeafNode>(&node); leaf && leaf->label >= labels_.size()) {
        throw ContractViolation("leaf label index out of range");
      }
    }
    max_shapelet_length_ = std::max(max_shapelet_length_, tree.max_shapelet_length());
  }
}

std::uint32_t ShapeletForest::label_index(const std::string& label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) {
    throw ContractViolation("unknown label '" + label + "'");
  }
  return static_cast<std::uint32_t>(it - labels_.begin());
}

bool ShapeletForest::has_label(const std::string& label) const noexcept {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

// ---------------------------------------------------------------------------
// Prediction

namespace {

void require_long_enough(const ShapeletForest& forest, std::size_t length) {
  if (length < forest.max_shapelet_length()) {
    throw ContractViolation("series of length " + std::to_string(length) +
                            " is shorter than a forest shapelet of length " +
                            std::to_string(forest.max_shapelet_length()));
  }
}

}  // namespace

std::vector<std::size_t> vote_counts(const ShapeletForest& forest,
                                     std::span<const double> series) {
  require_long_enough(forest, series.size());
  std::vector<std::size_t> votes(forest.labels().size(), 0);
  for (const auto& tree : forest.trees()) {
    ++votes[tree.predict(series)];
  }
  return votes;
}

std::uint32_t predict_index(const ShapeletForest& forest, std::span<const double> series) {
  const auto votes = vote_counts(forest, series);
  // max_element returns the first maximum, i.e. the earliest label on ties.
  return static_cast<std::uint32_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

const std::string& predict(const ShapeletForest& forest, std::span<const double> series) {
  return forest.labels()[predict_index(forest, series)];
}

const std::string& predict(const ShapeletForest& forest, const TimeSeries& series) {
  return predict(forest, series.values());
}

std::vector<std::string> predict_batch(const ShapeletForest& forest,
                                       std::span<const TimeSeries> series, Execution exec) {
  std::vector<std::uint32_t> idx(series.size());
  for (const auto& s : series) require_long_enough(forest, s.size());
  const auto n = static_cast<std::ptrdiff_t>(series.size());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    idx[static_cast<std::size_t>(i)] = predict_index(forest, series[static_cast<std::size_t>(i)].values());
  }
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(forest.labels()[i]);
  return out;
}

std::vector<DecisionPath> extract_paths(const ShapeletForest& forest, const std::string& label) {
  const std::uint32_t wanted = forest.label_index(label);
  std::vector<DecisionPath> out;
  for (std::size_t t = 0; t < forest.trees().size(); ++t) {
    auto paths = forest.trees()[t].paths();
    for (std::size_t p = 0; p < paths.size(); ++p) {
      if (paths[p].second != wanted || paths[p].first.empty()) {
        continue;
      }
      out.push_back({std::move(paths[p].first), label, t, p});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

double entropy(std::span<const std::size_t> counts, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

struct TreeGrower {
  std::span<const LabeledSeries> data;
  std::span<const std::uint32_t> label_of;  // label index per data row
  std::size_t label_count;
  std::size_t shapelets_per_node;
  std::size_t min_len;
  std::size_t max_len;
  std::mt19937_64 rng;
  std::vector<TreeNode> nodes;

  struct Split {
    double gain = -1.0;
    double threshold = 0.0;
    std::size_t row = 0;
    std::size_t start = 0;
    std::size_t length = 0;
  };

  std::uint32_t majority(std::span<const std::size_t> counts) const {
    return static_cast<std::uint32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }

  Split best_split(std::span<const std::size_t> samples, std::span<const std::size_t> counts) {
    const std::size_t n = samples.size();
    const double parent_h = entropy(counts, n);
    Split best;
    std::vector<std::pair<double, std::uint32_t>> dist(n);
    std::vector<std::size_t> left(label_count);
    std::vector<std::size_t> right(label_count);

    for (std::size_t c = 0; c < shapelets_per_node; ++c) {
      const std::size_t row =
          samples[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)];
      const auto& source = data[row].series;
      const std::size_t length = std::uniform_int_distribution<std::size_t>(min_len, max_len)(rng);
      const std::size_t start =
          std::uniform_int_distribution<std::size_t>(0, source.size() - length)(rng);
      const auto shapelet = source.values().subspan(start, length);

      for (std::size_t i = 0; i < n; ++i) {
        dist[i] = {subsequence_distance(shapelet, data[samples[i]].series.values()).distance,
                   label_of[samples[i]]};
      }
      std::sort(dist.begin(), dist.end());

      std::fill(left.begin(), left.end(), 0);
      std::copy(counts.begin(), counts.end(), right.begin());
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left[dist[i].second];
        --right[dist[i].second];
        if (!(dist[i].first < dist[i + 1].first)) {
          continue;
        }
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        const double gain = parent_h - (static_cast<double>(nl) * entropy(left, nl) +
                                        static_cast<double>(nr) * entropy(right, nr)) /
                                           static_cast<double>(n);
        if (gain > best.gain) {
          double threshold = 0.5 * (dist[i].first + dist[i + 1].first);
          if (!(threshold < dist[i + 1].first)) threshold = dist[i].first;
          best = {gain, threshold, row, start, length};
        }
      }
    }
    return best;
  }

  std::uint32_t grow(std::vector<std::size_t> samples) {
    std::vector<std::size_t> counts(label_count, 0);
    for (std::size_t s : samples) ++counts[label_of[s]];
    const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });

    const auto id = static_cast<std::uint32_t>(nodes.size());
    if (present <= 1 || samples.size() < 2) {
      nodes.emplace_back(LeafNode{majority(counts)});
      return id;
    }
    const Split split = best_split(samples, counts);
    if (split.gain < 0.0) {
      // Every sampled shapelet was equidistant to all samples.
      nodes.emplace_back(LeafNode{majority(counts)});
      return id;
    }

    const auto values = data[split.row].series.values().subspan(split.start, split.length);
    Shapelet shapelet(std::vector<double>(values.begin(), values.end()));
    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t s : samples) {
      const double d = subsequence_distance(shapelet.values(), data[s].series.values()).distance;
      (d <= split.threshold ? left_rows : right_rows).push_back(s);
    }
    nodes.emplace_back(SplitNode{std::move(shapelet), split.threshold, 0, 0});
    samples.clear();
    samples.shrink_to_fit();

    const std::uint32_t l = grow(std::move(left_rows));
    const std::uint32_t r = grow(std::move(right_rows));
    auto& node = std::get<SplitNode>(nodes[id]);
    node.left = l;
    node.right = r;
    return id;
  }
};

std::mt19937_64 tree_rng(std::uint64_t seed, std::size_t tree_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tree_index & 0xffffffffu),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(tree_index) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

ShapeletForest train(std::span<const LabeledSeries> data, const ForestParams& params,
                     Execution exec) {
  if (data.empty()) {
    throw TrainingError("cannot train on an empty dataset");
  }
  if (params.n_trees == 0 || params.shapelets_per_node == 0) {
    throw TrainingError("n_trees and shapelets_per_node must be positive");
  }

  std::set<std::string> label_set;
  std::size_t shortest = std::numeric_limits<std::size_t>::max();
  for (const auto& row : data) {
    label_set.insert(row.label);
    shortest = std::min(shortest, row.series.size());
  }
  if (label_set.size() < 2) {
    throw TrainingError("training needs at least two distinct labels");
  }
  std::vector<std::string> labels(label_set.begin(), label_set.end());
  std::vector<std::uint32_t> label_of(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    label_of[i] = static_cast<std::uint32_t>(
        std::lower_bound(labels.begin(), labels.end(), data[i].label) - labels.begin());
  }

  // Shapelets must fit every training series.
  const std::size_t max_len =
      params.max_shapelet_length == 0 ? shortest : std::min(params.max_shapelet_length, shortest);
  const std::size_t min_len = std::clamp<std::size_t>(params.min_shapelet_length, 1, max_len);
  if (params.max_shapelet_length != 0 && params.max_shapelet_length < params.min_shapelet_length) {
    throw TrainingError("max shapelet length is below min shapelet length");
  }

  std::vector<std::vector<TreeNode>> grown(params.n_trees);
  std::exception_ptr failure;
  const auto n_trees = static_cast<std::ptrdiff_t>(params.n_trees);

#pragma omp parallel for schedule(dynamic, 1) if (exec == Execution::parallel)
  for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
    try {
      TreeGrower grower{data, label_of, labels.size(), params.shapelets_per_node,
                        min_len, max_len, tree_rng(params.seed, static_cast<std::size_t>(t)), {}};
      std::vector<std::size_t> sample(data.size());
      if (params.bootstrap) {
        std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
        for (auto& s : sample) s = pick(grower.rng);
        std::sort(sample.begin(), sample.end());
      } else {
        std::iota(sample.begin(), sample.end(), std::size_t{0});
      }
      grower.grow(std::move(sample));
      grown[static_cast<std::size_t>(t)] = std::move(grower.nodes);
    } catch (...) {
#pragma omp critical(shapetweak_train_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ShapeletTree> trees;
  trees.reserve(grown.size());
  for (auto& nodes : grown) trees.emplace_back(std::move(nodes), labels.size());
  return ShapeletForest(std::move(trees), std::move(labels), params);
}

}  // namespace shapetweak
