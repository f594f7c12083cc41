#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shapetweak/errors.hpp"
#include "shapetweak/evaluation.hpp"
#include "shapetweak/synthetic.hpp"
#include "test_support.hpp"

using namespace shapetweak;

namespace {

TweakResult result(std::vector<double> values, bool success) {
  return TweakResult{TimeSeries(std::move(values)), 0.0, success, {}, std::nullopt, {}, {}};
}

ExperimentConfig small_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.test_fraction = 0.25;
  c.forest.n_trees = 6;
  c.forest.shapelets_per_node = 6;
  c.forest.min_shapelet_length = 3;
  c.forest.max_shapelet_length = 12;
  c.forest.seed = seed;
  c.methods.rt_unpruned = true;
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("mean cost over successes only") {
  const std::vector<TimeSeries> originals{TimeSeries({0.0, 0.0}), TimeSeries({0.0, 0.0}),
                                          TimeSeries({1.0, 1.0})};
  const std::vector<TweakResult> results{result({3.0, 4.0}, true), result({9.0, 9.0}, false),
                                         result({1.0, 2.0}, true)};
  CHECK(mean_cost(results, originals) == doctest::Approx(3.0));
  const std::vector<TweakResult> failed{result({1.0, 1.0}, false)};
  CHECK(std::isnan(mean_cost(failed, std::vector<TimeSeries>{TimeSeries({0.0, 0.0})})));
  CHECK_THROWS_AS(mean_cost({}, {}), ContractViolation);
  CHECK_THROWS_AS(mean_cost(results, std::vector<TimeSeries>{}), ContractViolation);
}

TEST_CASE("compactness counts changed positions") {
  CHECK(compactness(TimeSeries({0, 1, 2}), TimeSeries({0, 1.5, 2}), 0.1) == doctest::Approx(1.0 / 3.0));
  CHECK(compactness(TimeSeries({0, 1, 2}), TimeSeries({0, 1, 2}), 0.0) == 0.0);
  CHECK(compactness(TimeSeries({0, 1}), TimeSeries({5, 6}), 1e-9) == 1.0);
  CHECK(compactness(TimeSeries({0, 1}), TimeSeries({0.05, 1}), 0.1) == 0.0);
  CHECK_THROWS_AS(compactness(TimeSeries({0}), TimeSeries({0, 1}), 0.1), ContractViolation);
}

TEST_CASE("accuracy and one-nearest-neighbour") {
  const std::vector<LabeledSeries> truth{{"a", TimeSeries({0.0})}, {"b", TimeSeries({1.0})},
                                         {"a", TimeSeries({2.0})}, {"b", TimeSeries({3.0})}};
  const std::vector<std::string> predicted{"a", "b", "b", "b"};
  CHECK(accuracy(predicted, truth) == 0.75);
  CHECK_THROWS_AS(accuracy(std::vector<std::string>{}, std::vector<LabeledSeries>{}),
                  ContractViolation);

  const std::vector<LabeledSeries> train{{"x", TimeSeries({0.0, 0.0})}, {"y", TimeSeries({4.0, 4.0})}};
  CHECK(nn_predict(train, TimeSeries({1.0, 1.0})) == "x");
  CHECK(nn_predict(train, TimeSeries({3.0, 3.0})) == "y");
  CHECK(nn_predict(train, TimeSeries({2.0, 2.0})) == "x");  // tie: first row
  const std::vector<LabeledSeries> test{{"x", TimeSeries({0.5, 0.5})}, {"x", TimeSeries({3.5, 3.5})}};
  CHECK(nn_accuracy(train, test) == 0.5);
}

TEST_CASE("stratified split") {
  std::vector<LabeledSeries> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({"A", TimeSeries({double(i)})});
  for (int i = 0; i < 5; ++i) rows.push_back({"B", TimeSeries({double(100 + i)})});
  const auto s = stratified_split(rows, 0.2, 7);
  CHECK(s.test.size() == 3);
  CHECK(s.train.size() == 12);
  std::map<std::string, int> per;
  for (const auto& r : s.test) ++per[r.label];
  CHECK(per["A"] == 2);
  CHECK(per["B"] == 1);
  for (std::size_t i = 0; i < s.test.size(); ++i) CHECK(rows[s.test_rows[i]].series == s.test[i].series);

  const auto again = stratified_split(rows, 0.2, 7);
  CHECK(again.test_rows == s.test_rows);
  bool differs = false;
  for (std::uint64_t seed = 8; seed < 20 && !differs; ++seed) {
    differs = stratified_split(rows, 0.2, seed).test_rows != s.test_rows;
  }
  CHECK(differs);

  rows.push_back({"C", TimeSeries({-1.0})});
  CHECK_THROWS_AS(stratified_split(rows, 0.6, 1), ExperimentError);
  CHECK_THROWS_AS(stratified_split(rows, 1.0, 1), ContractViolation);
}

TEST_CASE("experiment is deterministic and independent of execution mode") {
  const auto rows = make_planted_dataset(testsupport::small_planted(12, 16, 32));
  auto cfg = small_config(3);
  MetricsReport a{{run_experiment("planted", rows, cfg)}};
  MetricsReport b{{run_experiment("planted", rows, cfg)}};
  cfg.execution = Execution::serial;
  MetricsReport c{{run_experiment("planted", rows, cfg)}};
  CHECK(format_metrics_csv(a) == format_metrics_csv(b));
  CHECK(format_metrics_csv(a) == format_metrics_csv(c));
  // rt and rt-unpruned agree on every instance.
  const auto& rep = a.datasets[0];
  CHECK(rep.find(Method::rt)->cost_mean == rep.find(Method::rt_unpruned)->cost_mean);
  CHECK(rep.find(Method::rt)->succeeded == rep.find(Method::rt_unpruned)->succeeded);
}

TEST_CASE("experiment summaries are recomputable from the per-instance records") {
  const auto rows = make_planted_dataset(testsupport::small_planted(13, 16, 32));
  const auto cfg = small_config(4);
  const auto report = run_experiment("planted", rows, cfg);
  const auto split = stratified_split(rows, cfg.test_fraction, cfg.seed);
  CHECK(report.n_test == split.test.size());
  CHECK(report.n_train == split.train.size());

  for (const auto& summary : report.methods) {
    std::map<std::string, std::pair<double, std::size_t>> by_target;
    std::size_t attempted = 0;
    for (const auto& r : report.records) {
      if (r.method != summary.method) continue;
      ++attempted;
      auto& slot = by_target[r.target];
      if (r.success) {
        slot.first += r.cost;
        ++slot.second;
      }
    }
    CHECK(attempted == summary.attempted);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [target, acc] : by_target) {
      if (acc.second == 0) continue;
      sum += acc.first / static_cast<double>(acc.second);
      ++n;
    }
    if (n > 0) CHECK(summary.cost_mean == doctest::Approx(sum / static_cast<double>(n)).epsilon(1e-12));
  }

  // Nearest-neighbour costs against an exhaustive scan of the training split.
  for (const auto& r : report.records) {
    if (r.method != Method::nn) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : split.train) {
      if (t.label != r.target) continue;
      best = std::min(best, testsupport::direct_distance(
                                {t.series.values().begin(), t.series.values().end()},
                                {rows[r.instance].series.values().begin(),
                                 rows[r.instance].series.values().end()}));
    }
    CHECK(r.cost == doctest::Approx(best).epsilon(1e-12));
    CHECK(r.compactness > 0.9);
  }
}

TEST_CASE("multi-class data needs explicit label pairs") {
  auto rows = make_planted_dataset(testsupport::small_planted(14, 10, 24));
  for (int i = 0; i < 10; ++i) rows.push_back({"2", TimeSeries(std::vector<double>(24, 5.0 + i))});
  auto cfg = small_config(1);
  CHECK_THROWS_AS(run_experiment("three", rows, cfg), ExperimentError);
  cfg.label_pairs = {{"1", "2"}};
  CHECK_NOTHROW(run_experiment("three", rows, cfg));
  cfg.label_pairs = {{"1", "9"}};
  CHECK_THROWS_AS(run_experiment("three", rows, cfg), ExperimentError);
}

TEST_CASE("report formats") {
  const auto rows = make_planted_dataset(testsupport::small_planted(15, 12, 24));
  const auto cfg = small_config(5);
  MetricsReport report{{run_experiment("one", rows, cfg), run_experiment("two", rows, small_config(6))}};

  const auto csv = lines(format_metrics_csv(report));
  REQUIRE(!csv.empty());
  CHECK(csv[0] == kMetricsCsvHeader);
  CHECK(csv.size() == 1 + 3 * 4);
  CHECK(csv.back().rfind("Avg.,", 0) == 0);
  for (std::size_t i = 1; i < csv.size(); ++i) {
    CHECK(std::count(csv[i].begin(), csv[i].end(), ',') ==
          std::count(csv[0].begin(), csv[0].end(), ','));
  }
  CHECK(format_metrics_csv(report).find("seconds") == std::string::npos);

  const auto timing = lines(format_timing_csv(report));
  CHECK(timing[0] == "dataset,method,seconds_per_transformation");
  CHECK(timing.size() == csv.size());

  const auto tables = format_tables(report);
  CHECK(tables.find("Avg.") != std::string::npos);
  CHECK(tables.find("Fraction of predictions pruned") != std::string::npos);

  std::size_t records = 0;
  for (const auto& d : report.datasets) records += d.records.size();
  const auto audit = lines(format_audit_jsonl(report));
  CHECK(audit.size() == records);
  const auto first = nlohmann::json::parse(audit.front());
  CHECK(first.contains("edits"));
  CHECK(first.contains("pruned_fraction"));

  CHECK(parse_method("irt") == Method::irt);
  CHECK(method_name(Method::rt_unpruned) == "rt-unpruned");
  CHECK_THROWS_AS(parse_method("dtw"), ContractViolation);
}
