#include "shapetweak/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <random>

#include <json.hpp>

#include "shapetweak/dataset.hpp"
#include "shapetweak/errors.hpp"

namespace shapetweak {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::rt: return "rt";
    case Method::rt_unpruned: return "rt-unpruned";
    case Method::irt: return "irt";
    case Method::nn: return "nn";
  }
  return "rt";
}

Method parse_method(std::string_view name) {
  if (name == "rt") return Method::rt;
  if (name == "rt-unpruned") return Method::rt_unpruned;
  if (name == "irt") return Method::irt;
  if (name == "nn") return Method::nn;
  throw ContractViolation("unknown method '" + std::string(name) + "'");
}

std::vector<Method> MethodSelection::enabled() const {
  std::vector<Method> out;
  if (rt) out.push_back(Method::rt);
  if (rt_unpruned) out.push_back(Method::rt_unpruned);
  if (irt) out.push_back(Method::irt);
  if (nn) out.push_back(Method::nn);
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

double mean_cost(std::span<const TweakResult> results, std::span<const TimeSeries> originals) {
  if (results.empty()) {
    throw ContractViolation("mean_cost of an empty result list");
  }
  if (results.size() != originals.size()) {
    throw ContractViolation("mean_cost: every result needs its original");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].success) continue;
    sum += euclidean_distance(originals[i].values(), results[i].transformed.values());
    ++n;
  }
  return n == 0 ? kNaN : sum / static_cast<double>(n);
}

double compactness(const TimeSeries& original, const TimeSeries& transformed, double e) {
  if (original.size() != transformed.size()) {
    throw ContractViolation("compactness: length mismatch");
  }
  if (!(e >= 0.0)) {
    throw ContractViolation("compactness: threshold must be non-negative");
  }
  std::size_t changed = 0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    if (std::abs(original[i] - transformed[i]) > e) ++changed;
  }
  return static_cast<double>(changed) / static_cast<double>(original.size());
}

double accuracy(std::span<const std::string> predicted, std::span<const LabeledSeries> truth) {
  if (truth.empty()) {
    throw ContractViolation("accuracy of an empty test set");
  }
  if (predicted.size() != truth.size()) {
    throw ContractViolation("accuracy: prediction count mismatch");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i].label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double accuracy(const ShapeletForest& forest, std::span<const LabeledSeries> test) {
  std::vector<TimeSeries> series;
  series.reserve(test.size());
  for (const auto& r : test) series.push_back(r.series);
  return accuracy(predict_batch(forest, series), test);
}

const std::string& nn_predict(std::span<const LabeledSeries> train, const TimeSeries& series) {
  const LabeledSeries* best_row = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : train) {
    if (row.series.size() != series.size()) continue;
    const double d = squared_distance_bounded(row.series.values(), series.values(), best);
    if (d < best) {
      best = d;
      best_row = &row;
    }
  }
  if (!best_row) {
    throw ContractViolation("nn_predict: no training series of length " +
                            std::to_string(series.size()));
  }
  return best_row->label;
}

double nn_accuracy(std::span<const LabeledSeries> train, std::span<const LabeledSeries> test) {
  std::vector<std::string> predicted;
  predicted.reserve(test.size());
  for (const auto& r : test) predicted.push_back(nn_predict(train, r.series));
  return accuracy(predicted, test);
}

Split stratified_split(std::span<const LabeledSeries> rows, double test_fraction,
                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ContractViolation("test_fraction must lie in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < rows.size(); ++i) by_label[rows[i].label].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<bool> is_test(rows.size(), false);
  for (auto& [label, idx] : by_label) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto take = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * test_fraction));
    if (take >= idx.size()) {
      throw ExperimentError("class '" + label + "' would be absent from the training split; "
                            "lower test_fraction or try another seed");
    }
    for (std::size_t k = 0; k < take; ++k) is_test[idx[k]] = true;
  }

  Split out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (is_test[i]) {
      out.test.push_back(rows[i]);
      out.test_rows.push_back(i);
    } else {
      out.train.push_back(rows[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment

const MethodSummary* DatasetReport::find(Method m) const noexcept {
  for (const auto& s : methods) {
    if (s.method == m) return &s;
  }
  return nullptr;
}

namespace {

struct TweakDirection {
  std::optional<std::string> source;
  std::string target;
};

double nan_mean(const std::vector<double>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    sum += x;
    ++n;
  }
  return n == 0 ? kNaN : sum / static_cast<double>(n);
}

}  // namespace

DatasetReport run_experiment(const std::string& name, std::span<const LabeledSeries> rows,
                             const ExperimentConfig& config) {
  if (!(config.compactness_e >= 0.0)) {
    throw ContractViolation("compactness threshold must be non-negative");
  }
  const Split split = stratified_split(rows, config.test_fraction, config.seed);
  if (split.test.empty()) {
    throw ExperimentError("test split is empty; raise test_fraction");
  }
  const ShapeletForest forest = train(split.train, config.forest, config.execution);

  std::vector<TimeSeries> test_series;
  for (const auto& r : split.test) test_series.push_back(r.series);
  const auto predicted = predict_batch(forest, test_series, config.execution);

  DatasetReport report;
  report.dataset = name;
  report.series_length = split.test.front().series.size();
  for (const auto& r : rows) report.series_length = std::max(report.series_length, r.series.size());
  report.n_train = split.train.size();
  report.n_test = split.test.size();
  report.forest_accuracy = accuracy(predicted, split.test);
  report.nn_accuracy = nn_accuracy(split.train, split.test);

  std::vector<TweakDirection> directions;
  if (config.label_pairs.empty()) {
    if (forest.labels().size() != 2) {
      throw ExperimentError("dataset '" + name + "' has " +
                            std::to_string(forest.labels().size()) +
                            " classes; pass explicit source->target label pairs");
    }
    for (const auto& l : forest.labels()) directions.push_back({std::nullopt, l});
  } else {
    for (const auto& [s, t] : config.label_pairs) {
      if (!forest.has_label(s) || !forest.has_label(t) || s == t) {
        throw ExperimentError("invalid label pair " + s + "->" + t);
      }
      directions.push_back({s, t});
    }
  }

  const auto methods = config.methods.enabled();
  struct Item {
    std::size_t direction;
    std::size_t test_index;
    Method method;
  };
  std::vector<Item> items;
  for (std::size_t d = 0; d < directions.size(); ++d) {
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      const bool eligible = directions[d].source ? predicted[i] == *directions[d].source
                                                 : predicted[i] != directions[d].target;
      if (!eligible) continue;
      for (Method m : methods) items.push_back({d, i, m});
    }
  }

  std::vector<InstanceRecord> records(items.size());
  std::exception_ptr failure;
  const auto n_items = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(dynamic) if (config.execution == Execution::parallel)
  for (std::ptrdiff_t k = 0; k < n_items; ++k) {
    try {
      const Item& it = items[static_cast<std::size_t>(k)];
      const auto& original = split.test[it.test_index].series;
      const std::string& target = directions[it.direction].target;
      TweakConfig tweak = config.tweak;
      tweak.execution = Execution::serial;

      const auto start = std::chrono::steady_clock::now();
      TweakResult result = [&] {
        switch (it.method) {
          case Method::rt: return tweak_reversible_pruned(forest, original, target, tweak);
          case Method::rt_unpruned: return tweak_reversible(forest, original, target, tweak);
          case Method::irt: return tweak_irreversible(forest, original, target, tweak);
          case Method::nn: return tweak_nn(split.train, original, target, &forest);
        }
        return tweak_reversible_pruned(forest, original, target, tweak);
      }();
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      InstanceRecord& rec = records[static_cast<std::size_t>(k)];
      rec.instance = split.test_rows[it.test_index];
      rec.from = predicted[it.test_index];
      rec.target = target;
      rec.method = it.method;
      rec.cost = result.cost;
      rec.compactness = compactness(original, result.transformed, config.compactness_e);
      rec.success = result.success;
      rec.seconds = seconds;
      rec.stats = result.stats;
      rec.edits = std::move(result.edits);
    } catch (...) {
#pragma omp critical(shapetweak_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (Method m : methods) {
    MethodSummary s;
    s.method = m;
    std::vector<double> cost, compact, rate, seconds, pruned;
    for (std::size_t d = 0; d < directions.size(); ++d) {
      double c = 0.0, cp = 0.0, sec = 0.0, pr = 0.0;
      std::size_t attempted = 0, ok = 0;
      for (std::size_t k = 0; k < items.size(); ++k) {
        if (items[k].direction != d || items[k].method != m) continue;
        const auto& r = records[k];
        ++attempted;
        sec += r.seconds;
        pr += r.stats.pruned_fraction();
        if (!r.success) continue;
        ++ok;
        c += r.cost;
        cp += r.compactness;
      }
      if (attempted == 0) continue;
      s.attempted += attempted;
      s.succeeded += ok;
      const auto na = static_cast<double>(attempted);
      rate.push_back(static_cast<double>(ok) / na);
      seconds.push_back(sec / na);
      pruned.push_back(pr / na);
      cost.push_back(ok == 0 ? kNaN : c / static_cast<double>(ok));
      compact.push_back(ok == 0 ? kNaN : cp / static_cast<double>(ok));
    }
    s.cost_mean = nan_mean(cost);
    s.compactness_mean = nan_mean(compact);
    s.success_rate = nan_mean(rate);
    s.seconds_mean = nan_mean(seconds);
    s.pruned_fraction = nan_mean(pruned);
    report.methods.push_back(s);
  }
  report.records = std::move(records);
  return report;
}

DatasetReport MetricsReport::average() const {
  DatasetReport avg;
  avg.dataset = "Avg.";
  std::vector<double> facc, nacc;
  std::vector<Method> order;
  for (const auto& d : datasets) {
    facc.push_back(d.forest_accuracy);
    nacc.push_back(d.nn_accuracy);
    avg.n_train += d.n_train;
    avg.n_test += d.n_test;
    for (const auto& m : d.methods) {
      if (std::find(order.begin(), order.end(), m.method) == order.end()) order.push_back(m.method);
    }
  }
  avg.forest_accuracy = nan_mean(facc);
  avg.nn_accuracy = nan_mean(nacc);
  for (Method m : order) {
    MethodSummary s;
    s.method = m;
    std::vector<double> cost, compact, rate, seconds, pruned;
    for (const auto& d : datasets) {
      const auto* x = d.find(m);
      if (!x) continue;
      cost.push_back(x->cost_mean);
      compact.push_back(x->compactness_mean);
      rate.push_back(x->success_rate);
      seconds.push_back(x->seconds_mean);
      pruned.push_back(x->pruned_fraction);
      s.attempted += x->attempted;
      s.succeeded += x->succeeded;
    }
    s.cost_mean = nan_mean(cost);
    s.compactness_mean = nan_mean(compact);
    s.success_rate = nan_mean(rate);
    s.seconds_mean = nan_mean(seconds);
    s.pruned_fraction = nan_mean(pruned);
    avg.methods.push_back(s);
  }
  return avg;
}

// ---------------------------------------------------------------------------
// Report writers

namespace {

std::string fixed(double v, int precision = 4) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string exact(double v) { return std::isnan(v) ? "" : format_double(v); }

std::string pad(const std::string& s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::vector<const DatasetReport*> rows_with_average(const MetricsReport& report,
                                                    DatasetReport& avg) {
  std::vector<const DatasetReport*> rows;
  for (const auto& d : report.datasets) rows.push_back(&d);
  if (!report.datasets.empty()) {
    avg = report.average();
    rows.push_back(&avg);
  }
  return rows;
}

}  // namespace

std::string format_tables(const MetricsReport& report) {
  DatasetReport avg;
  const auto rows = rows_with_average(report, avg);
  std::size_t name_w = 8;
  for (const auto* r : rows) name_w = std::max(name_w, r->dataset.size());
  constexpr std::size_t w = 12;

  auto metric = [](const DatasetReport& d, Method m, auto field) -> std::string {
    const auto* s = d.find(m);
    return s ? field(*s) : std::string("-");
  };

  std::string out;
  out += pad("", name_w, true) + " | " + pad("Cost", 3 * w, true) + " | " +
         pad("Compactness", 3 * w, true) + " | " + pad("Accuracy", 2 * w, true) + "\n";
  out += pad("Dataset", name_w, true) + " | ";
  for (auto* h : {"rt", "irt", "nn"}) out += pad(h, w);
  out += " | ";
  for (auto* h : {"rt", "irt", "nn"}) out += pad(h, w);
  out += " | " + pad("RSF", w) + pad("NN(1)", w) + "\n";
  out += std::string(name_w + 3 + 3 * w + 3 + 3 * w + 3 + 2 * w, '-') + "\n";
  for (const auto* d : rows) {
    if (d == &avg) out += std::string(name_w + 3 + 3 * w + 3 + 3 * w + 3 + 2 * w, '-') + "\n";
    out += pad(d->dataset, name_w, true) + " | ";
    for (Method m : {Method::rt, Method::irt, Method::nn})
      out += pad(metric(*d, m, [](const MethodSummary& s) { return fixed(s.cost_mean); }), w);
    out += " | ";
    for (Method m : {Method::rt, Method::irt, Method::nn})
      out += pad(metric(*d, m, [](const MethodSummary& s) { return fixed(s.compactness_mean); }), w);
    out += " | " + pad(fixed(d->forest_accuracy), w) + pad(fixed(d->nn_accuracy), w) + "\n";
  }

  out += "\n";
  out += pad("", name_w, true) + " | " + pad("", 6) + " | " +
         pad("Runtime (seconds per transformation)", 3 * w, true) + " | " +
         pad("Fraction of predictions pruned", 2 * w, true) + "\n";
  out += pad("Dataset", name_w, true) + " | " + pad("|T|", 6) + " | " + pad("rt (no pruning)", w + 4) +
         pad("rt", w - 2) + pad("irt", w - 2) + " | " + pad("rt", w) + pad("irt", w) + "\n";
  out += std::string(name_w + 3 + 6 + 3 + 3 * w + 3 + 2 * w, '-') + "\n";
  for (const auto* d : rows) {
    if (d == &avg) out += std::string(name_w + 3 + 6 + 3 + 3 * w + 3 + 2 * w, '-') + "\n";
    out += pad(d->dataset, name_w, true) + " | " +
           pad(d == &avg ? "" : std::to_string(d->series_length), 6) + " | ";
    out += pad(metric(*d, Method::rt_unpruned, [](const MethodSummary& s) { return fixed(s.seconds_mean, 3); }), w + 4);
    out += pad(metric(*d, Method::rt, [](const MethodSummary& s) { return fixed(s.seconds_mean, 3); }), w - 2);
    out += pad(metric(*d, Method::irt, [](const MethodSummary& s) { return fixed(s.seconds_mean, 3); }), w - 2);
    out += " | ";
    out += pad(metric(*d, Method::rt, [](const MethodSummary& s) { return fixed(s.pruned_fraction, 3); }), w);
    out += pad(metric(*d, Method::irt, [](const MethodSummary& s) { return fixed(s.pruned_fraction, 3); }), w);
    out += "\n";
  }
  return out;
}

std::string format_metrics_csv(const MetricsReport& report) {
  DatasetReport avg;
  const auto rows = rows_with_average(report, avg);
  std::string out(kMetricsCsvHeader);
  out += "\n";
  for (const auto* d : rows) {
    for (const auto& s : d->methods) {
      out += d->dataset + "," + std::string(method_name(s.method)) + "," + exact(s.cost_mean) + "," +
             exact(s.compactness_mean) + "," + exact(s.success_rate) + "," +
             exact(s.pruned_fraction) + "," + std::to_string(s.attempted) + "," +
             std::to_string(s.succeeded) + "," + exact(d->forest_accuracy) + "," +
             exact(d->nn_accuracy) + "," + (d == &avg ? "" : std::to_string(d->series_length)) +
             "\n";
    }
  }
  return out;
}

std::string format_timing_csv(const MetricsReport& report) {
  DatasetReport avg;
  const auto rows = rows_with_average(report, avg);
  std::string out = "dataset,method,seconds_per_transformation\n";
  for (const auto* d : rows) {
    for (const auto& s : d->methods) {
      out += d->dataset + "," + std::string(method_name(s.method)) + "," + exact(s.seconds_mean) + "\n";
    }
  }
  return out;
}

std::string format_audit_jsonl(const MetricsReport& report) {
  std::string out;
  for (const auto& d : report.datasets) {
    for (const auto& r : d.records) {
      nlohmann::json edits = nlohmann::json::array();
      for (const auto& e : r.edits) {
        edits.push_back({e.tree_index, e.path_index, e.condition_index, e.start, e.length});
      }
      nlohmann::json j = {{"dataset", d.dataset},
                          {"instance", r.instance},
                          {"from", r.from},
                          {"target", r.target},
                          {"method", method_name(r.method)},
                          {"cost", r.cost},
                          {"compactness", r.compactness},
                          {"success", r.success},
                          {"seconds", r.seconds},
                          {"candidates", r.stats.candidates},
                          {"predictions", r.stats.predictions},
                          {"abandoned", r.stats.abandoned},
                          {"aborted", r.stats.aborted},
                          {"capped", r.stats.capped},
                          {"pruned_fraction", r.stats.pruned_fraction()},
                          {"edits", std::move(edits)}};
      out += j.dump() + "\n";
    }
  }
  return out;
}

}  // namespace shapetweak
