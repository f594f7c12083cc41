#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace shapetweak {

/// An ordered, non-empty sequence of finite real samples taken at equal
/// intervals. Immutable after construction.
class TimeSeries {
public:
  /// Throws ContractViolation if `values` is empty or contains NaN/Inf.
  explicit TimeSeries(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  const std::vector<double>& data() const noexcept { return values_; }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
  std::vector<double> values_;
};

/// A materialized subsequence used as a split feature.
class Shapelet {
public:
  explicit Shapelet(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  friend bool operator==(const Shapelet&, const Shapelet&) = default;

private:
  std::vector<double> values_;
};

/// Non-owning window [start, start + length) of a series.
class Subsequence {
public:
  Subsequence(const TimeSeries& source, std::size_t start, std::size_t length);

  std::size_t start() const noexcept { return start_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  Shapelet materialize() const;

private:
  std::span<const double> values_;
  std::size_t start_;
};

struct LabeledSeries {
  std::string label;
  TimeSeries series;
};

struct MatchLocation {
  std::size_t start = 0;
  double distance = 0.0;

  friend bool operator==(const MatchLocation&, const MatchLocation&) = default;
};

/// Unnormalized Euclidean norm of a - b. Throws ContractViolation when the
/// lengths differ or are zero.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Squared distance accumulated left to right. Returns early with a partial
/// sum >= `bound` as soon as the running sum reaches the bound; the returned
/// value is then only a lower bound. With an infinite bound the full sum is
/// returned and sqrt of it equals euclidean_distance bit for bit.
double squared_distance_bounded(std::span<const double> a, std::span<const double> b,
                                double bound) noexcept;

/// Best-matching window of `shapelet` in `series`; ties resolve to the lowest
/// start. Throws ContractViolation when the shapelet is longer than the series.
MatchLocation subsequence_distance(std::span<const double> shapelet,
                                   std::span<const double> series);
MatchLocation subsequence_distance(const Shapelet& shapelet, const TimeSeries& series);

/// Every window with distance <= theta, ascending by start.
std::vector<MatchLocation> matches_within(std::span<const double> shapelet,
                                          std::span<const double> series, double theta);
std::vector<MatchLocation> matches_within(const Shapelet& shapelet, const TimeSeries& series,
                                          double theta);

/// Z-normalizes a whole series (mean 0, population std 1). A constant series
/// maps to all zeros.
std::vector<double> z_normalize(std::span<const double> values);

}  // namespace shapetweak
