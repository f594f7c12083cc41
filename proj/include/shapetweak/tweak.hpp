#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapetweak/forest.hpp"
#include "shapetweak/parallel.hpp"
#include "shapetweak/series.hpp"

namespace shapetweak {

struct TweakConfig {
  double epsilon = 1.0;                      // transformation strength, > 0
  std::size_t max_increase_iterations = 0;   // 0: 100 * series length
  bool early_abandon = true;                 // irreversible only
  Execution execution = Execution::parallel; // candidate generation in the pruned tweaker
  // Irreversible only: what the increase loop does when every window still
  // within the threshold overlaps a locked region. true: the candidate aborts;
  // false: the loop stops and the condition is left violated.
  bool abort_on_locked_violation = true;

  std::size_t increase_cap(std::size_t series_length) const noexcept {
    return max_increase_iterations == 0 ? 100 * series_length : max_increase_iterations;
  }
};

/// Sorted, merged set of half-open index intervals.
class LockedRegions {
public:
  struct Interval {
    std::size_t begin = 0;
    std::size_t end = 0;
    friend bool operator==(const Interval&, const Interval&) = default;
  };

  void lock(std::size_t start, std::size_t length);
  bool overlaps(std::size_t start, std::size_t length) const noexcept;
  bool contains(std::size_t index) const noexcept;
  std::span<const Interval> intervals() const noexcept { return intervals_; }
  bool empty() const noexcept { return intervals_.empty(); }

private:
  std::vector<Interval> intervals_;
};

/// Best window that does not overlap a locked region; ties go to the lowest start.
std::optional<MatchLocation> best_unlocked_match(std::span<const double> shapelet,
                                                 std::span<const double> series,
                                                 const LockedRegions& locked);

struct TransformedWindow {
  std::vector<double> values;
  bool degenerate = false;  // target radius theta + eps * direction was negative and clamped to 0
};

/// Moves `matched` along the ray from the condition shapelet through it so
/// that its distance to the shapelet becomes theta + epsilon * direction: just
/// inside the threshold sphere for a less-equal condition, just outside for a
/// greater one. A window equal to the shapelet is pushed along the first axis.
TransformedWindow transform_subsequence(std::span<const double> matched,
                                        const PathCondition& condition, double epsilon);

struct Edit {
  std::size_t tree_index = 0;
  std::size_t path_index = 0;
  std::size_t condition_index = 0;
  std::size_t start = 0;
  std::size_t length = 0;

  friend bool operator==(const Edit&, const Edit&) = default;
};

enum class TweakMode { reversible, irreversible };

enum class CandidateStatus {
  completed,
  aborted_locked,  // irreversible: no unlocked window left for a required edit
  iteration_cap,   // the increase-distance loop hit max_increase_iterations
  abandoned,       // irreversible early abandoning: partial cost reached the best cost
};

struct CandidateOutcome {
  std::vector<double> values;
  double cost = 0.0;
  std::vector<Edit> edits;
  CandidateStatus status = CandidateStatus::completed;
};

/// Called after every individual window edit with the working series and its
/// cost against the original.
using EditObserver = std::function<void(const DecisionPath& path, const Edit& edit,
                                        std::span<const double> working, double cost)>;

/// Applies one decision path to a fresh copy of `original`. Irreversible mode
/// stops with `abandoned` as soon as the running cost reaches `abandon_at`.
CandidateOutcome apply_path(const DecisionPath& path, std::span<const double> original,
                            const TweakConfig& config, TweakMode mode,
                            double abandon_at = std::numeric_limits<double>::infinity(),
                            const EditObserver& observer = {});

struct TweakStats {
  std::size_t candidates = 0;   // paths labeled with the desired class
  std::size_t predictions = 0;  // forest predictions executed
  std::size_t abandoned = 0;
  std::size_t aborted = 0;
  std::size_t capped = 0;

  std::size_t eligible() const noexcept { return candidates - aborted - capped; }
  /// Share of prediction-eligible candidates that were never predicted.
  double pruned_fraction() const noexcept {
    const std::size_t e = eligible();
    return e == 0 ? 0.0 : static_cast<double>(e - predictions) / static_cast<double>(e);
  }
};

struct CandidateId {
  std::size_t tree_index = 0;
  std::size_t path_index = 0;
  friend bool operator==(const CandidateId&, const CandidateId&) = default;
};

struct TweakResult {
  TimeSeries transformed;
  double cost = 0.0;
  bool success = false;
  std::vector<Edit> edits;
  std::optional<CandidateId> candidate;
  TweakStats stats;
  std::string diagnostic;
};

/// Greedy reversible tweaking: every desired-label path is applied to a fresh
/// copy, every completed candidate is predicted, and the cheapest success wins
/// (ties to the lowest (tree, path)). Serial reference implementation.
/// Throws ContractViolation if the series is already predicted as `desired`.
TweakResult tweak_reversible(const ShapeletForest& forest, const TimeSeries& series,
                             const std::string& desired, const TweakConfig& config = {});

/// Same answer as tweak_reversible, but all candidates are generated first
/// (in parallel when config.execution says so), sorted by cost, and predicted
/// in that order until the first success.
TweakResult tweak_reversible_pruned(const ShapeletForest& forest, const TimeSeries& series,
                                    const std::string& desired, const TweakConfig& config = {});

/// Irreversible tweaking: edited windows are locked against later edits, so
/// each candidate's cost only grows and candidates can be abandoned once they
/// reach the best successful cost (config.early_abandon).
TweakResult tweak_irreversible(const ShapeletForest& forest, const TimeSeries& series,
                               const std::string& desired, const TweakConfig& config = {},
                               const EditObserver& observer = {});

/// Nearest training series labeled `desired` (Euclidean, same length only).
/// Success is judged by `forest` when given, otherwise always true.
TweakResult tweak_nn(std::span<const LabeledSeries> training, const TimeSeries& series,
                     const std::string& desired, const ShapeletForest* forest = nullptr);

}  // namespace shapetweak
