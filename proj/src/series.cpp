#include "shapetweak/series.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "shapetweak/errors.hpp"

namespace shapetweak {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  if (values.empty()) {
    throw ContractViolation(std::string(what) + " must be non-empty");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ContractViolation(std::string(what) + " contains a non-finite value");
    }
  }
}

void require_fits(std::size_t shapelet_len, std::size_t series_len) {
  if (shapelet_len == 0) {
    throw ContractViolation("shapelet must be non-empty");
  }
  if (shapelet_len > series_len) {
    throw ContractViolation("shapelet of length " + std::to_string(shapelet_len) +
                            " is longer than series of length " + std::to_string(series_len));
  }
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
  require_finite(values_, "time series");
}

Shapelet::Shapelet(std::vector<double> values) : values_(std::move(values)) {
  require_finite(values_, "shapelet");
}

Subsequence::Subsequence(const TimeSeries& source, std::size_t start, std::size_t length)
    : start_(start) {
  if (length == 0 || start > source.size() || length > source.size() - start) {
    throw ContractViolation("subsequence [" + std::to_string(start) + ", +" +
                            std::to_string(length) + ") outside series of length " +
                            std::to_string(source.size()));
  }
  values_ = source.values().subspan(start, length);
}

Shapelet Subsequence::materialize() const {
  return Shapelet(std::vector<double>(values_.begin(), values_.end()));
}

double squared_distance_bounded(std::span<const double> a, std::span<const double> b,
                                double bound) noexcept {
  double sum = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
    if (sum >= bound) {
      return sum;
    }
  }
  return sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractViolation("euclidean_distance: length mismatch (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) {
    throw ContractViolation("euclidean_distance: empty input");
  }
  return std::sqrt(
      squared_distance_bounded(a, b, std::numeric_limits<double>::infinity()));
}

MatchLocation subsequence_distance(std::span<const double> shapelet,
                                   std::span<const double> series) {
  require_fits(shapelet.size(), series.size());
  const std::size_t len = shapelet.size();
  const std::size_t windows = series.size() - len + 1;

  // Partial sums are non-decreasing, so a window abandoned at >= best can
  // never become strictly better; the winner's sum is always complete.
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_start = 0;
  for (std::size_t s = 0; s < windows; ++s) {
    const double d = squared_distance_bounded(shapelet, series.subspan(s, len), best);
    if (d < best) {
      best = d;
      best_start = s;
    }
  }
  return {best_start, std::sqrt(best)};
}

MatchLocation subsequence_distance(const Shapelet& shapelet, const TimeSeries& series) {
  return subsequence_distance(shapelet.values(), series.values());
}

std::vector<MatchLocation> matches_within(std::span<const double> shapelet,
                                          std::span<const double> series, double theta) {
  require_fits(shapelet.size(), series.size());
  const std::size_t len = shapelet.size();
  const std::size_t windows = series.size() - len + 1;
  std::vector<MatchLocation> out;
  for (std::size_t s = 0; s < windows; ++s) {
    const double d = euclidean_distance(shapelet, series.subspan(s, len));
    if (d <= theta) {
      out.push_back({s, d});
    }
  }
  return out;
}

std::vector<MatchLocation> matches_within(const Shapelet& shapelet, const TimeSeries& series,
                                          double theta) {
  return matches_within(shapelet.values(), series.values(), theta);
}

std::vector<double> z_normalize(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) {
    return out;
  }
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(out.size()));
  for (double& v : out) {
    v = sd > 0.0 ? (v - mean) / sd : 0.0;
  }
  return out;
}

}  // namespace shapetweak
