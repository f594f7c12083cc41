#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "shapetweak/forest.hpp"
#include "shapetweak/series.hpp"

namespace shapetweak {

inline constexpr std::size_t kBruteForceMaxLength = 20;

// Binary position tests expressed with ordinary shapelet splits. For a 0/1
// series of length n, the full-length probe (2 at `position`, 0.5 elsewhere)
// is at squared distance (n - 1) / 4 + 1 when T[position] = 1 and
// (n - 1) / 4 + 4 when it is 0, so the threshold below puts "T[position] = 1"
// on the less-equal branch.
Shapelet position_probe(std::size_t length, std::size_t position);
double position_threshold(std::size_t length);

/// Ground set {0, ..., universe - 1} and subsets over it.
struct HittingSetInstance {
  std::size_t universe = 0;
  std::vector<std::vector<std::size_t>> sets;
};

/// One tree per subset: a chain of position tests that votes "1" iff the
/// series has a 1 at some element of that subset, "0" otherwise. Flipping an
/// all-zero series to "1" with at most k changes asks for k elements hitting
/// more than half of the sets (vote ties go to "0").
ShapeletForest hitting_set_forest(const HittingSetInstance& instance);

/// Exhaustive search for a smallest set of positions whose 0/1 flip makes the
/// forest predict `desired`. Subsets are tried by size, then lexicographically.
/// Returns nullopt when no flip set of size <= k works. Throws
/// ContractViolation for non-binary series or lengths above kBruteForceMaxLength.
std::optional<std::vector<std::size_t>> brute_force_min_changes(const ShapeletForest& forest,
                                                                const TimeSeries& series,
                                                                const std::string& desired,
                                                                std::size_t k);

/// Positions where |a_i - b_i| > e.
std::size_t changed_positions(const TimeSeries& a, const TimeSeries& b, double e);

}  // namespace shapetweak
