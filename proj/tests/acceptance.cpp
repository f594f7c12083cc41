// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on any FAIL.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "shapetweak/dataset.hpp"
#include "shapetweak/evaluation.hpp"
#include "shapetweak/forest_io.hpp"
#include "shapetweak/oracle.hpp"
#include "shapetweak/synthetic.hpp"
#include "shapetweak/tweak.hpp"
#include "test_support.hpp"

using namespace shapetweak;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes pinned by the acceptance criteria.
constexpr std::size_t kMinTriples = 200;
constexpr double kPruningBudgetSeconds = 120.0;
constexpr std::size_t kTransformCalls = 10'000;
constexpr double kRadiusTolerance = 1e-9;
constexpr std::size_t kMonotoneInstances = 100;
constexpr std::size_t kTrendSeeds = 5;
constexpr std::size_t kTrendRequired = 4;
constexpr double kTrendBudgetSeconds = 600.0;
constexpr double kNnCompactnessFloor = 0.95;
constexpr std::size_t kToyInstances = 20;
constexpr std::size_t kToyMaxLength = 12;
constexpr double kPrunedLow = 0.3;
constexpr double kPrunedHigh = 1.0;
constexpr std::size_t kRoundTripInputs = 1000;
constexpr double kAccuracySlack = 0.05;

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool bit_equal(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool bit_equal(const TimeSeries& a, const TimeSeries& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bit_equal(a[i], b[i])) return false;
  }
  return true;
}

std::string other_label(const ShapeletForest& f, const std::string& l) {
  return f.labels()[0] == l ? f.labels()[1] : f.labels()[0];
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

// Successful results gathered across criteria, re-checked by the path-walk oracle.
struct SoundnessLog {
  struct Entry {
    const ShapeletForest* forest;
    TimeSeries transformed;
    std::string desired;
  };
  std::vector<Entry> entries;

  void add(const ShapeletForest& forest, const TweakResult& r, const std::string& desired) {
    if (r.success) entries.push_back({&forest, r.transformed, desired});
  }
};

// Small forests over planted-shape data: the shared fixture of criteria 1, 2 and 4.
struct Fixture {
  std::vector<std::vector<LabeledSeries>> data;
  std::vector<ShapeletForest> forests;
};

Fixture make_fixture() {
  Fixture fx;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    PlantedShapeConfig pc;
    pc.per_class = 20;
    pc.length = 40;
    pc.bump_width = 10;
    pc.seed = 100 + seed;
    fx.data.push_back(make_planted_dataset(pc));
    ForestParams p;
    p.n_trees = 25;
    p.shapelets_per_node = 10;
    p.seed = seed;
    fx.forests.push_back(train(fx.data.back(), p));
  }
  return fx;
}

// ---------------------------------------------------------------------------

Outcome pruning_equivalence(const Fixture& fx, SoundnessLog& log) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t triples = 0, rt_mismatch = 0, irt_mismatch = 0, successes = 0;
  for (std::size_t f = 0; f < fx.forests.size(); ++f) {
    const auto& forest = fx.forests[f];
    for (const auto& row : fx.data[f]) {
      const auto desired = other_label(forest, predict(forest, row.series));
      TweakConfig serial;
      serial.execution = Execution::serial;
      const auto reference = tweak_reversible(forest, row.series, desired, serial);
      const auto pruned = tweak_reversible_pruned(forest, row.series, desired, {});
      if (!(reference.success == pruned.success && bit_equal(reference.cost, pruned.cost) &&
            bit_equal(reference.transformed, pruned.transformed))) {
        ++rt_mismatch;
      }
      TweakConfig full;
      full.early_abandon = false;
      const auto irt_full = tweak_irreversible(forest, row.series, desired, full);
      const auto irt_fast = tweak_irreversible(forest, row.series, desired, {});
      if (!(irt_full.success == irt_fast.success && bit_equal(irt_full.cost, irt_fast.cost) &&
            bit_equal(irt_full.transformed, irt_fast.transformed))) {
        ++irt_mismatch;
      }
      log.add(forest, reference, desired);
      log.add(forest, pruned, desired);
      log.add(forest, irt_fast, desired);
      log.add(forest, tweak_nn(fx.data[f], row.series, desired, &forest), desired);
      successes += reference.success;
      ++triples;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = triples >= kMinTriples && rt_mismatch == 0 && irt_mismatch == 0 &&
                  secs < kPruningBudgetSeconds;
  return {ok ? Status::pass : Status::fail,
          fmt("%zu triples (%zu rt successes), %zu rt and %zu irt mismatches, %.1f s", triples,
              successes, rt_mismatch, irt_mismatch, secs)};
}

Outcome radius_exactness(const Fixture& fx) {
  testsupport::SplitMix64 rng{2024};
  double worst = 0.0;
  std::size_t violations = 0, degenerate = 0;
  for (std::size_t call = 0; call < kTransformCalls; ++call) {
    const std::size_t l = 1 + rng.below(64);
    const auto center = rng.vector(l, 5.0);
    const auto window = rng.vector(l, 5.0);
    const double theta = rng.uniform(0.0, 10.0);
    const double eps = rng.uniform(1e-3, 2.0);
    const auto dir = rng.below(2) ? Direction::greater : Direction::less_equal;
    const auto t = transform_subsequence(window, {Shapelet(center), theta, dir}, eps);
    const double target = theta + eps * sign(dir);
    const double got = testsupport::direct_distance(t.values, center);
    if (target < 0.0) {
      // Unreachable negative radius: the window collapses onto the shapelet.
      ++degenerate;
      if (!t.degenerate || got != 0.0) ++violations;
      continue;
    }
    const double err = std::abs(got - target) / std::max(1.0, theta);
    worst = std::max(worst, err);
    if (err > kRadiusTolerance) ++violations;
  }

  // Every edit made during tweaking, re-measured right after it is applied.
  std::size_t edits = 0;
  for (std::size_t f = 0; f < 2; ++f) {
    const auto& forest = fx.forests[f];
    for (const auto& row : fx.data[f]) {
      const auto desired = other_label(forest, predict(forest, row.series));
      const EditObserver check = [&](const DecisionPath& p, const Edit& e, std::span<const double> working,
                                     double) {
        const auto& c = p.conditions[e.condition_index];
        const auto win = working.subspan(e.start, e.length);
        const double target = std::max(0.0, c.threshold + sign(c.direction) * 1.0);
        const double err = std::abs(euclidean_distance(win, c.shapelet.values()) - target) /
                           std::max(1.0, c.threshold);
        worst = std::max(worst, err);
        if (err > kRadiusTolerance) ++violations;
        ++edits;
      };
      for (const auto& path : extract_paths(forest, desired)) {
        apply_path(path, row.series.values(), {}, TweakMode::reversible,
                   std::numeric_limits<double>::infinity(), check);
        apply_path(path, row.series.values(), {}, TweakMode::irreversible,
                   std::numeric_limits<double>::infinity(), check);
      }
    }
  }
  return {violations == 0 ? Status::pass : Status::fail,
          fmt("%zu transform calls (%zu clamped) + %zu tweak edits, worst relative error %.3g, "
              "%zu violations",
              kTransformCalls, degenerate, edits, worst, violations)};
}

Outcome lock_monotonicity(const Fixture& fx, SoundnessLog& log) {
  std::size_t instances = 0, edits = 0, violations = 0;
  for (std::size_t f = 0; f < fx.forests.size() && instances < kMonotoneInstances; ++f) {
    const auto& forest = fx.forests[f];
    for (const auto& row : fx.data[f]) {
      if (instances == kMonotoneInstances) break;
      const auto desired = other_label(forest, predict(forest, row.series));
      std::optional<CandidateId> current;
      double last = 0.0;
      const EditObserver watch = [&](const DecisionPath& p, const Edit&, std::span<const double>,
                                     double cost) {
        const CandidateId id{p.tree_index, p.path_index};
        if (current != id) {
          current = id;
          last = 0.0;
        }
        if (cost < last) ++violations;
        last = cost;
        ++edits;
      };
      TweakConfig cfg;
      cfg.early_abandon = false;
      log.add(forest, tweak_irreversible(forest, row.series, desired, cfg, watch), desired);
      ++instances;
    }
  }
  return {instances == kMonotoneInstances && violations == 0 ? Status::pass : Status::fail,
          fmt("%zu instances, %zu edits observed, %zu decreases", instances, edits, violations)};
}

Outcome success_soundness(const SoundnessLog& log) {
  std::size_t bad = 0;
  for (const auto& e : log.entries) {
    if (testsupport::path_walk_predict(*e.forest, e.transformed.values()) != e.desired) ++bad;
  }
  return {!log.entries.empty() && bad == 0 ? Status::pass : Status::fail,
          fmt("%zu successful results re-routed through every tree, %zu disagree", log.entries.size(), bad)};
}

// ---------------------------------------------------------------------------

struct TrendRun {
  std::vector<DatasetReport> reports;
  double seconds = 0.0;
};

TrendRun run_trends() {
  TrendRun run;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= kTrendSeeds; ++seed) {
    PlantedShapeConfig pc;  // 125 per class: 200 train / 50 test at a 0.2 test fraction
    pc.seed = seed;
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.forest.seed = seed;
    run.reports.push_back(run_experiment("planted-" + std::to_string(seed), make_planted_dataset(pc), cfg));
  }
  run.seconds = seconds_since(t0);
  return run;
}

Outcome table_trends(const TrendRun& run) {
  std::size_t cost_ok = 0, compact_ok = 0, nn_ok = 0, shape_ok = 0;
  std::ostringstream per_seed;
  for (const auto& r : run.reports) {
    const auto* rt = r.find(Method::rt);
    const auto* irt = r.find(Method::irt);
    const auto* nn = r.find(Method::nn);
    const bool cost = rt->cost_mean <= irt->cost_mean && irt->cost_mean < nn->cost_mean;
    const bool compact =
        irt->compactness_mean <= rt->compactness_mean && rt->compactness_mean < nn->compactness_mean;
    cost_ok += cost;
    compact_ok += compact;
    nn_ok += nn->compactness_mean >= kNnCompactnessFloor;
    shape_ok += r.n_train == 200 && r.n_test == 50;
    per_seed << fmt(" [cost %.4f/%.4f/%.4f%s, compact %.4f/%.4f/%.4f%s]", rt->cost_mean, irt->cost_mean,
                    nn->cost_mean, cost ? "" : " x", rt->compactness_mean, irt->compactness_mean,
                    nn->compactness_mean, compact ? "" : " x");
  }
  const bool ok = cost_ok >= kTrendRequired && compact_ok >= kTrendRequired && nn_ok == kTrendSeeds &&
                  shape_ok == kTrendSeeds && run.seconds < kTrendBudgetSeconds;
  return {ok ? Status::pass : Status::fail,
          fmt("cost order %zu/%zu seeds, compactness order %zu/%zu, nn compactness >= %.2f in %zu/%zu, "
              "%.1f s; rt/irt/nn per seed:",
              cost_ok, kTrendSeeds, compact_ok, kTrendSeeds, kNnCompactnessFloor, nn_ok, kTrendSeeds,
              run.seconds) +
              per_seed.str()};
}

Outcome pruning_fraction(const TrendRun& run) {
  double rt_sum = 0.0, irt_sum = 0.0;
  bool in_range = true;
  for (const auto& r : run.reports) {
    const double rt = r.find(Method::rt)->pruned_fraction;
    rt_sum += rt;
    irt_sum += r.find(Method::irt)->pruned_fraction;
    in_range = in_range && rt >= kPrunedLow && rt <= kPrunedHigh;
  }
  const double n = static_cast<double>(run.reports.size());
  const double rt_avg = rt_sum / n, irt_avg = irt_sum / n;
  const bool ok = in_range && rt_avg >= kPrunedLow && rt_avg <= kPrunedHigh && rt_avg > irt_avg;
  return {ok ? Status::pass : Status::fail,
          fmt("rt pruned fraction %.3f (every seed in [%.1f, %.1f]: %s), irt abandoned fraction %.3f", rt_avg,
              kPrunedLow, kPrunedHigh, in_range ? "yes" : "no", irt_avg)};
}

// ---------------------------------------------------------------------------

std::vector<HittingSetInstance> toy_instances() {
  std::vector<HittingSetInstance> out;
  out.push_back({3, {{0, 1}, {1, 2}}});
  out.push_back({4, {{0}, {1}, {2}}});
  out.push_back({5, {{0, 4}, {1, 4}, {2, 4}, {3}}});
  out.push_back({6, {{0, 1}, {2, 3}, {4, 5}, {0, 2, 4}, {1, 3, 5}}});
  testsupport::SplitMix64 rng{606};
  while (out.size() < kToyInstances) {
    HittingSetInstance inst;
    inst.universe = 4 + rng.below(kToyMaxLength - 3);
    const std::size_t m = 2 + rng.below(5);
    for (std::size_t s = 0; s < m; ++s) {
      std::vector<std::size_t> set;
      const std::size_t size = 1 + rng.below(3);
      for (std::size_t k = 0; k < size; ++k) set.push_back(rng.below(inst.universe));
      inst.sets.push_back(set);
    }
    out.push_back(inst);
  }
  return out;
}

Outcome oracle_bound(SoundnessLog& log, std::vector<ShapeletForest>& keep) {
  const auto instances = toy_instances();
  keep.reserve(instances.size());
  testsupport::SplitMix64 rng{707};
  std::size_t solved = 0, greedy_successes = 0, violations = 0;
  for (const auto& inst : instances) {
    keep.push_back(hitting_set_forest(inst));
    const auto& forest = keep.back();
    std::vector<double> bits(inst.universe, 0.0);
    // Half the instances start from a random 0/1 series instead of all zeros.
    if (solved % 2 == 1) {
      for (auto& b : bits) b = rng.below(3) == 0 ? 1.0 : 0.0;
    }
    const TimeSeries series(bits);
    const auto desired = other_label(forest, predict(forest, series));
    const auto best = brute_force_min_changes(forest, series, desired, series.size());
    ++solved;
    for (const auto& r : {tweak_reversible_pruned(forest, series, desired),
                          tweak_irreversible(forest, series, desired)}) {
      if (!r.success) continue;
      ++greedy_successes;
      log.add(forest, r, desired);
      if (!best || best->size() > changed_positions(series, r.transformed, 1e-9)) ++violations;
    }
  }
  return {violations == 0 ? Status::pass : Status::fail,
          fmt("%zu toy instances (length <= %zu), %zu greedy successes, %zu bound violations", solved,
              kToyMaxLength, greedy_successes, violations)};
}

Outcome determinism() {
  const auto data = make_planted_dataset(testsupport::small_planted(808, 40, 48));
  ForestParams p;
  p.n_trees = 30;
  p.shapelets_per_node = 20;
  p.seed = 99;
  const auto a = serialize_forest(train(data, p, Execution::parallel));
  const auto b = serialize_forest(train(data, p, Execution::serial));
  const bool model_same = a == b;

  ExperimentConfig cfg;
  cfg.seed = 5;
  cfg.forest = p;
  const MetricsReport r1{{run_experiment("d", data, cfg)}};
  const MetricsReport r2{{run_experiment("d", data, cfg)}};
  const bool csv_same = format_metrics_csv(r1) == format_metrics_csv(r2);

  const auto forest = deserialize_forest(a);
  const auto back = deserialize_forest(serialize_forest(forest));
  testsupport::SplitMix64 rng{909};
  std::size_t differ = 0;
  for (std::size_t i = 0; i < kRoundTripInputs; ++i) {
    const auto probe = rng.vector(48, 4.0);
    if (predict(forest, probe) != predict(back, probe)) ++differ;
  }
  const bool ok = model_same && csv_same && differ == 0 && back == forest;
  return {ok ? Status::pass : Status::fail,
          fmt("model bytes identical: %s, metrics csv identical: %s, %zu/%zu round-trip predictions differ",
              model_same ? "yes" : "no", csv_same ? "yes" : "no", differ, kRoundTripInputs)};
}

// UCR layout: data/<Name>/<Name>_TRAIN.tsv and _TEST.tsv.
Outcome ucr_check() {
  const fs::path root = SHAPETWEAK_DATA_DIR;
  std::string detail;
  bool any = false, ok = true;
  for (const std::string name : {"GunPoint", "ECG200"}) {
    const auto train_path = root / name / (name + "_TRAIN.tsv");
    const auto test_path = root / name / (name + "_TEST.tsv");
    if (!fs::exists(train_path) || !fs::exists(test_path)) {
      detail += name + " absent; ";
      continue;
    }
    any = true;
    const auto train_rows = parse_ucr(train_path).records;
    const auto test_rows = parse_ucr(test_path).records;
    ForestParams p;
    p.seed = 1;
    const auto forest = train(train_rows, p);
    const double facc = accuracy(forest, test_rows);
    const double nacc = nn_accuracy(train_rows, test_rows);

    std::vector<TweakResult> rt, nn;
    std::vector<TimeSeries> originals;
    for (const auto& row : test_rows) {
      const auto desired = other_label(forest, predict(forest, row.series));
      rt.push_back(tweak_reversible_pruned(forest, row.series, desired));
      nn.push_back(tweak_nn(train_rows, row.series, desired, &forest));
      originals.push_back(row.series);
    }
    const double rt_cost = mean_cost(rt, originals);
    const double nn_cost = mean_cost(nn, originals);
    const bool here = facc >= nacc - kAccuracySlack && rt_cost < nn_cost;
    ok = ok && here;
    detail += fmt("%s: forest acc %.4f vs 1-NN %.4f, rt cost %.4f vs nn %.4f%s; ", name.c_str(), facc, nacc,
                  rt_cost, nn_cost, here ? "" : " (FAILED)");
  }
  if (!any) return {Status::skip, detail + "place UCR files under " + root.string()};
  return {ok ? Status::pass : Status::fail, detail};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    std::printf("criterion %d %s: %s - %s\n", id, tag, name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.status == Status::fail;
  };

  const Fixture fx = make_fixture();
  SoundnessLog log;
  std::vector<ShapeletForest> toy_forests;

  const auto c1 = pruning_equivalence(fx, log);
  const auto c2 = radius_exactness(fx);
  const auto c4 = lock_monotonicity(fx, log);
  const auto trends = run_trends();
  const auto c5 = table_trends(trends);
  const auto c6 = oracle_bound(log, toy_forests);
  const auto c7 = pruning_fraction(trends);
  const auto c8 = determinism();
  const auto c9 = ucr_check();
  const auto c3 = success_soundness(log);

  report(1, "pruning equivalence", c1);
  report(2, "radius exactness", c2);
  report(3, "success soundness", c3);
  report(4, "lock monotonicity", c4);
  report(5, "directional cost/compactness trends", c5);
  report(6, "oracle bound", c6);
  report(7, "pruning fraction", c7);
  report(8, "determinism and persistence", c8);
  report(9, "UCR GunPoint/ECG200", c9);
  std::printf("%s\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED");
  return failures == 0 ? 0 : 1;
}
