#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shapetweak/forest.hpp"
#include "shapetweak/parallel.hpp"
#include "shapetweak/series.hpp"
#include "shapetweak/tweak.hpp"

namespace shapetweak {

enum class Method { rt, rt_unpruned, irt, nn };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);

struct MethodSelection {
  bool rt = true;
  bool irt = true;
  bool nn = true;
  bool rt_unpruned = false;

  std::vector<Method> enabled() const;
};

struct ExperimentConfig {
  double test_fraction = 0.2;
  double compactness_e = 1e-9;
  std::uint64_t seed = 0;  // split seed; the forest uses forest.seed
  MethodSelection methods;
  ForestParams forest;
  TweakConfig tweak;
  // (source -> target) pairs judged on forest predictions. Empty: a binary
  // dataset is tweaked in both directions.
  std::vector<std::pair<std::string, std::string>> label_pairs;
  Execution execution = Execution::parallel;  // across test instances
};

/// Arithmetic mean of c(original, transformed) over successful results;
/// failures are skipped. NaN when nothing succeeded. Throws
/// ContractViolation on empty or mismatched input.
double mean_cost(std::span<const TweakResult> results, std::span<const TimeSeries> originals);

/// Fraction of positions with |a_i - b_i| > e (1 means every sample changed).
double compactness(const TimeSeries& original, const TimeSeries& transformed, double e);

/// Fraction of predictions equal to the true labels.
double accuracy(std::span<const std::string> predicted, std::span<const LabeledSeries> truth);
double accuracy(const ShapeletForest& forest, std::span<const LabeledSeries> test);
double nn_accuracy(std::span<const LabeledSeries> train, std::span<const LabeledSeries> test);

/// 1-NN Euclidean label among same-length training series (first wins ties).
const std::string& nn_predict(std::span<const LabeledSeries> train, const TimeSeries& series);

struct Split {
  std::vector<LabeledSeries> train;
  std::vector<LabeledSeries> test;
  std::vector<std::size_t> test_rows;  // source row of each test series
};

/// Stratified, seeded split; each class sends round(n_c * test_fraction)
/// rows to the test side. Throws ExperimentError if a class would be absent
/// from the training side.
Split stratified_split(std::span<const LabeledSeries> rows, double test_fraction,
                       std::uint64_t seed);

struct InstanceRecord {
  std::size_t instance = 0;  // source row index
  std::string from;          // forest prediction before tweaking
  std::string target;
  Method method = Method::rt;
  double cost = 0.0;
  double compactness = 0.0;
  bool success = false;
  double seconds = 0.0;
  TweakStats stats;
  std::vector<Edit> edits;
};

struct MethodSummary {
  Method method = Method::rt;
  double cost_mean = 0.0;         // macro average over directions, successes only
  double compactness_mean = 0.0;  // idem
  double success_rate = 0.0;
  double seconds_mean = 0.0;
  double pruned_fraction = 0.0;
  std::size_t attempted = 0;
  std::size_t succeeded = 0;
};

struct DatasetReport {
  std::string dataset;
  std::size_t series_length = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double forest_accuracy = 0.0;
  double nn_accuracy = 0.0;
  std::vector<MethodSummary> methods;
  std::vector<InstanceRecord> records;

  const MethodSummary* find(Method m) const noexcept;
};

struct MetricsReport {
  std::vector<DatasetReport> datasets;

  /// Column-wise mean over datasets ("Avg." row); NaN entries are skipped.
  DatasetReport average() const;
};

/// Splits, trains, tweaks every eligible test instance with each enabled
/// method in every direction, and aggregates the results.
DatasetReport run_experiment(const std::string& name, std::span<const LabeledSeries> rows,
                             const ExperimentConfig& config);

/// Aligned text mirroring the cost/compactness/accuracy and runtime/pruning tables.
std::string format_tables(const MetricsReport& report);
/// One row per (dataset, method) plus Avg. rows; no wall-clock columns, so
/// equal inputs give byte-identical files.
std::string format_metrics_csv(const MetricsReport& report);
std::string format_timing_csv(const MetricsReport& report);
/// One JSON object per line per (instance, direction, method).
std::string format_audit_jsonl(const MetricsReport& report);

inline constexpr std::string_view kMetricsCsvHeader =
    "dataset,method,cost_mean,compactness_mean,success_rate,pruned_fraction,attempted,"
    "succeeded,forest_accuracy,nn_accuracy,series_length";

}  // namespace shapetweak
