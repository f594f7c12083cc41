#include "shapetweak/tweak.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "shapetweak/errors.hpp"

namespace shapetweak {

// ---------------------------------------------------------------------------
// LockedRegions

void LockedRegions::lock(std::size_t start, std::size_t length) {
  if (length == 0) return;
  Interval add{start, start + length};
  // First interval that could touch `add` (end >= add.begin).
  auto it = std::lower_bound(intervals_.begin(), intervals_.end(), add.begin,
                             [](const Interval& iv, std::size_t b) { return iv.end < b; });
  auto last = it;
  while (last != intervals_.end() && last->begin <= add.end) {
    add.begin = std::min(add.begin, last->begin);
    add.end = std::max(add.end, last->end);
    ++last;
  }
  it = intervals_.erase(it, last);
  intervals_.insert(it, add);
}

bool LockedRegions::overlaps(std::size_t start, std::size_t length) const noexcept {
  if (length == 0) return false;
  const std::size_t end = start + length;
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), start,
                             [](std::size_t s, const Interval& iv) { return s < iv.end; });
  return it != intervals_.end() && it->begin < end;
}

bool LockedRegions::contains(std::size_t index) const noexcept { return overlaps(index, 1); }

std::optional<MatchLocation> best_unlocked_match(std::span<const double> shapelet,
                                                 std::span<const double> series,
                                                 const LockedRegions& locked) {
  if (shapelet.empty() || shapelet.size() > series.size()) {
    throw ContractViolation("shapelet does not fit the series");
  }
  const std::size_t len = shapelet.size();
  const std::size_t windows = series.size() - len + 1;
  double best = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> best_start;
  for (std::size_t s = 0; s < windows; ++s) {
    if (locked.overlaps(s, len)) continue;
    const double d = squared_distance_bounded(shapelet, series.subspan(s, len), best);
    if (!best_start || d < best) {
      best = d;
      best_start = s;
    }
  }
  if (!best_start) return std::nullopt;
  return MatchLocation{*best_start, std::sqrt(best)};
}

// ---------------------------------------------------------------------------
// Window transform

TransformedWindow transform_subsequence(std::span<const double> matched,
                                        const PathCondition& condition, double epsilon) {
  const auto center = condition.shapelet.values();
  if (matched.size() != center.size()) {
    throw ContractViolation("transform_subsequence: window and shapelet lengths differ");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ContractViolation("transform_subsequence: epsilon must be positive");
  }

  TransformedWindow out;
  double radius = condition.threshold + epsilon * sign(condition.direction);
  if (radius < 0.0) {
    radius = 0.0;
    out.degenerate = true;
  }

  std::vector<double> direction(matched.size());
  for (std::size_t i = 0; i < matched.size(); ++i) direction[i] = matched[i] - center[i];
  double norm = 0.0;
  for (double d : direction) norm += d * d;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    std::fill(direction.begin(), direction.end(), 0.0);
    direction[0] = 1.0;
    norm = 1.0;
  }

  // Nearest point of the target sphere: the ray from the center through the
  // window, not its reflection through the center.
  const double scale = radius / norm;
  out.values.resize(matched.size());
  for (std::size_t i = 0; i < matched.size(); ++i) {
    out.values[i] = center[i] + direction[i] * scale;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-path application

namespace {

class PathRunner {
public:
  PathRunner(const DecisionPath& path, std::span<const double> original, const TweakConfig& config,
             TweakMode mode, double abandon_at, const EditObserver& observer)
      : path_(path), original_(original), config_(config), mode_(mode),
        abandon_at_(abandon_at), observer_(observer) {
    out_.values.assign(original.begin(), original.end());
  }

  CandidateOutcome run() {
    for (std::size_t k = 0; k < path_.conditions.size(); ++k) {
      const auto& cond = path_.conditions[k];
      if (condition_test(out_.values, cond)) continue;
      const bool ok = cond.direction == Direction::greater ? increase(k, cond) : decrease(k, cond);
      if (!ok) return std::move(out_);
    }
    if (mode_ == TweakMode::irreversible && out_.cost >= abandon_at_) {
      out_.status = CandidateStatus::abandoned;
    }
    return std::move(out_);
  }

private:
  bool irreversible() const { return mode_ == TweakMode::irreversible; }

  std::optional<MatchLocation> best(const PathCondition& cond) const {
    if (irreversible()) return best_unlocked_match(cond.shapelet.values(), out_.values, locked_);
    return subsequence_distance(cond.shapelet.values(), out_.values);
  }

  // Returns false when the candidate must stop (abandoned).
  bool edit(std::size_t k, const PathCondition& cond, std::size_t start) {
    const std::size_t len = cond.shapelet.size();
    auto window = std::span<double>(out_.values).subspan(start, len);
    const auto moved = transform_subsequence(window, cond, config_.epsilon);
    std::copy(moved.values.begin(), moved.values.end(), window.begin());
    if (irreversible()) locked_.lock(start, len);

    const Edit e{path_.tree_index, path_.path_index, k, start, len};
    out_.edits.push_back(e);
    out_.cost = euclidean_distance(original_, out_.values);
    if (observer_) observer_(path_, e, out_.values, out_.cost);
    if (irreversible() && out_.cost >= abandon_at_) {
      out_.status = CandidateStatus::abandoned;
      return false;
    }
    return true;
  }

  bool increase(std::size_t k, const PathCondition& cond) {
    const std::size_t cap = config_.increase_cap(out_.values.size());
    std::size_t iterations = 0;
    while (true) {
      const auto m = best(cond);
      if (!m || m->distance > cond.threshold) {
        if (irreversible() && config_.abort_on_locked_violation &&
            !condition_test(out_.values, cond)) {
          out_.status = CandidateStatus::aborted_locked;
          return false;
        }
        return true;
      }
      if (++iterations > cap) {
        out_.status = CandidateStatus::iteration_cap;
        return false;
      }
      if (!edit(k, cond, m->start)) return false;
    }
  }

  bool decrease(std::size_t k, const PathCondition& cond) {
    const auto m = best(cond);
    if (!m) {
      out_.status = CandidateStatus::aborted_locked;
      return false;
    }
    return edit(k, cond, m->start);
  }

  const DecisionPath& path_;
  std::span<const double> original_;
  const TweakConfig& config_;
  TweakMode mode_;
  double abandon_at_;
  const EditObserver& observer_;
  LockedRegions locked_;
  CandidateOutcome out_;
};

void check_request(const ShapeletForest& forest, const TimeSeries& series,
                   const std::string& desired, const TweakConfig& config) {
  if (!(config.epsilon > 0.0)) {
    throw ContractViolation("epsilon must be positive");
  }
  if (!forest.has_label(desired)) {
    throw ContractViolation("desired label '" + desired + "' is not a forest label");
  }
  if (predict(forest, series) == desired) {
    throw ContractViolation("series is already predicted as '" + desired + "'");
  }
}

TweakResult unchanged(const TimeSeries& series, TweakStats stats, std::string diagnostic) {
  return TweakResult{series, 0.0, false, {}, std::nullopt, stats, std::move(diagnostic)};
}

TweakResult finish(const TimeSeries& series, const std::vector<DecisionPath>& paths,
                   std::optional<std::size_t> winner, std::vector<CandidateOutcome>& outcomes,
                   TweakStats stats) {
  if (!winner) {
    return unchanged(series, stats, "no candidate path changed the prediction");
  }
  auto& best = outcomes[*winner];
  return TweakResult{TimeSeries(std::move(best.values)),
                     best.cost,
                     true,
                     std::move(best.edits),
                     CandidateId{paths[*winner].tree_index, paths[*winner].path_index},
                     stats,
                     {}};
}

}  // namespace

CandidateOutcome apply_path(const DecisionPath& path, std::span<const double> original,
                            const TweakConfig& config, TweakMode mode, double abandon_at,
                            const EditObserver& observer) {
  return PathRunner(path, original, config, mode, abandon_at, observer).run();
}

// ---------------------------------------------------------------------------
// Reversible

TweakResult tweak_reversible(const ShapeletForest& forest, const TimeSeries& series,
                             const std::string& desired, const TweakConfig& config) {
  check_request(forest, series, desired, config);
  const auto paths = extract_paths(forest, desired);
  TweakStats stats;
  stats.candidates = paths.size();
  if (paths.empty()) {
    return unchanged(series, stats, "no decision path leads to '" + desired + "'");
  }
  const auto want = forest.label_index(desired);

  std::vector<CandidateOutcome> outcomes(paths.size());
  std::optional<std::size_t> winner;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    outcomes[i] = apply_path(paths[i], series.values(), config, TweakMode::reversible);
    if (outcomes[i].status == CandidateStatus::iteration_cap) {
      ++stats.capped;
      continue;
    }
    ++stats.predictions;
    if (predict_index(forest, outcomes[i].values) == want &&
        (!winner || outcomes[i].cost < outcomes[*winner].cost)) {
      winner = i;
    }
  }
  return finish(series, paths, winner, outcomes, stats);
}

TweakResult tweak_reversible_pruned(const ShapeletForest& forest, const TimeSeries& series,
                                    const std::string& desired, const TweakConfig& config) {
  check_request(forest, series, desired, config);
  const auto paths = extract_paths(forest, desired);
  TweakStats stats;
  stats.candidates = paths.size();
  if (paths.empty()) {
    return unchanged(series, stats, "no decision path leads to '" + desired + "'");
  }
  const auto want = forest.label_index(desired);

  std::vector<CandidateOutcome> outcomes(paths.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(paths.size());
#pragma omp parallel for schedule(dynamic) if (config.execution == Execution::parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto u = static_cast<std::size_t>(i);
      outcomes[u] = apply_path(paths[u], series.values(), config, TweakMode::reversible);
    } catch (...) {
#pragma omp critical(shapetweak_tweak_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::size_t> order;
  order.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (outcomes[i].status == CandidateStatus::iteration_cap) {
      ++stats.capped;
    } else {
      order.push_back(i);
    }
  }
  // Paths are already in (tree, path) order, so a stable sort breaks cost ties the same way.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outcomes[a].cost < outcomes[b].cost;
  });

  std::optional<std::size_t> winner;
  for (std::size_t i : order) {
    ++stats.predictions;
    if (predict_index(forest, outcomes[i].values) == want) {
      winner = i;
      break;
    }
  }
  return finish(series, paths, winner, outcomes, stats);
}

// ---------------------------------------------------------------------------
// Irreversible

TweakResult tweak_irreversible(const ShapeletForest& forest, const TimeSeries& series,
                               const std::string& desired, const TweakConfig& config,
                               const EditObserver& observer) {
  check_request(forest, series, desired, config);
  const auto paths = extract_paths(forest, desired);
  TweakStats stats;
  stats.candidates = paths.size();
  if (paths.empty()) {
    return unchanged(series, stats, "no decision path leads to '" + desired + "'");
  }
  const auto want = forest.label_index(desired);

  std::vector<CandidateOutcome> outcomes(paths.size());
  std::optional<std::size_t> winner;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double abandon_at =
        config.early_abandon ? best_cost : std::numeric_limits<double>::infinity();
    outcomes[i] = apply_path(paths[i], series.values(), config, TweakMode::irreversible,
                             abandon_at, observer);
    switch (outcomes[i].status) {
      case CandidateStatus::aborted_locked: ++stats.aborted; continue;
      case CandidateStatus::iteration_cap: ++stats.capped; continue;
      case CandidateStatus::abandoned: ++stats.abandoned; continue;
      case CandidateStatus::completed: break;
    }
    ++stats.predictions;
    if (predict_index(forest, outcomes[i].values) == want && outcomes[i].cost < best_cost) {
      winner = i;
      best_cost = outcomes[i].cost;
    }
  }
  auto result = finish(series, paths, winner, outcomes, stats);
  if (!winner && stats.aborted == stats.candidates) {
    result.diagnostic = "every candidate path was blocked by locked regions";
  }
  return result;
}

// ---------------------------------------------------------------------------
// Nearest neighbour baseline

TweakResult tweak_nn(std::span<const LabeledSeries> training, const TimeSeries& series,
                     const std::string& desired, const ShapeletForest* forest) {
  const LabeledSeries* nearest = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : training) {
    if (row.label != desired || row.series.size() != series.size()) continue;
    const double d = squared_distance_bounded(row.series.values(), series.values(), best);
    if (d < best) {
      best = d;
      nearest = &row;
    }
  }
  if (!nearest) {
    throw ContractViolation("no training series labeled '" + desired + "' of length " +
                            std::to_string(series.size()));
  }
  TweakResult result{nearest->series, std::sqrt(best), true, {}, std::nullopt, {}, {}};
  result.stats.candidates = 1;
  if (forest) {
    result.stats.predictions = 1;
    result.success = predict(*forest, nearest->series) == desired;
    if (!result.success) result.diagnostic = "forest does not predict the nearest neighbour as desired";
  }
  return result;
}

}  // namespace shapetweak
