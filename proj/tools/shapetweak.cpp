// shapetweak: train shapelet forests, tweak series toward a target label,
// run the evaluation harness and the brute-force oracle.

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "shapetweak/dataset.hpp"
#include "shapetweak/errors.hpp"
#include "shapetweak/evaluation.hpp"
#include "shapetweak/forest_io.hpp"
#include "shapetweak/oracle.hpp"
#include "shapetweak/synthetic.hpp"
#include "shapetweak/tweak.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace shapetweak;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParse = 2,
  kContract = 3,
  kNoSuccess = 4,
  kNoTweakNeeded = 5,
  kUsage = 64,
};

struct DataOptions {
  std::string delimiter = "auto";
  bool normalize = false;
  bool strict_length = false;

  ParseOptions parse() const {
    ParseOptions o;
    if (delimiter != "auto") o.delimiter = parse_delimiter(delimiter);
    o.normalize = normalize;
    o.strict_length = strict_length;
    return o;
  }
  json to_json() const {
    return {{"delimiter", delimiter}, {"normalize", normalize}, {"strict_length", strict_length}};
  }
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--delimiter", d.delimiter, "Field separator")
      ->check(CLI::IsMember({"auto", "comma", "tab", "whitespace"}))
      ->capture_default_str();
  cmd->add_flag("--normalize", d.normalize, "Z-normalize every series at load time");
  cmd->add_flag("--strict-length", d.strict_length, "Reject rows of differing length");
}

void add_forest_options(CLI::App* cmd, ForestParams& p) {
  cmd->add_option("--trees", p.n_trees, "Number of trees")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--shapelets-per-node", p.shapelets_per_node, "Random shapelet candidates per node")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--min-len", p.min_shapelet_length, "Shortest shapelet")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--max-len", p.max_shapelet_length, "Longest shapelet (0: series length)")->capture_default_str();
  cmd->add_flag("!--no-bootstrap", p.bootstrap, "Grow every tree on the full training set");
}

json forest_json(const ForestParams& p) {
  return {{"trees", p.n_trees},          {"shapelets_per_node", p.shapelets_per_node},
          {"min_len", p.min_shapelet_length}, {"max_len", p.max_shapelet_length},
          {"seed", p.seed},              {"bootstrap", p.bootstrap}};
}

void log_config(const std::string& command, json config) {
  config["command"] = command;
  std::cerr << "config " << config.dump() << "\n";
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string plot_data(const TimeSeries& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += format_double(s[i]);
    out += '\n';
  }
  return out;
}

json edits_json(const std::vector<Edit>& edits) {
  json out = json::array();
  for (const auto& e : edits) {
    out.push_back({{"tree", e.tree_index},
                   {"path", e.path_index},
                   {"condition", e.condition_index},
                   {"start", e.start},
                   {"length", e.length}});
  }
  return out;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string model;
  double holdout = 0.0;
  ForestParams forest;
  DataOptions io;
};

int run_train(const TrainArgs& a) {
  log_config("train", {{"data", a.data}, {"model", a.model}, {"holdout", a.holdout},
                       {"forest", forest_json(a.forest)}, {"io", a.io.to_json()},
                       {"threads", omp_get_max_threads()}});
  const auto file = parse_ucr(a.data, a.io.parse());
  std::vector<LabeledSeries> train_rows = file.records;
  std::vector<LabeledSeries> holdout;
  if (a.holdout > 0.0) {
    auto split = stratified_split(file.records, a.holdout, a.forest.seed);
    train_rows = std::move(split.train);
    holdout = std::move(split.test);
  }
  const auto forest = train(train_rows, a.forest);
  save_forest(forest, a.model);

  json summary = {{"model", a.model},
                  {"rows", file.rows()},
                  {"series_length", file.max_length()},
                  {"labels", std::vector<std::string>(forest.labels().begin(), forest.labels().end())},
                  {"trees", forest.trees().size()},
                  {"train_accuracy", accuracy(forest, train_rows)}};
  if (!holdout.empty()) summary["holdout_accuracy"] = accuracy(forest, holdout);
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string data;
  DataOptions io;
};

int run_predict(const PredictArgs& a) {
  log_config("predict", {{"model", a.model}, {"data", a.data}, {"io", a.io.to_json()}});
  const auto forest = load_forest(a.model);
  const auto file = parse_ucr(a.data, a.io.parse());
  json rows = json::array();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < file.rows(); ++i) {
    const auto& r = file.records[i];
    const auto& label = predict(forest, r.series);
    hits += label == r.label;
    rows.push_back({{"row", i}, {"label", r.label}, {"predicted", label}});
  }
  json out = {{"accuracy", static_cast<double>(hits) / static_cast<double>(file.rows())},
              {"predictions", std::move(rows)}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct TweakArgs {
  std::string model;
  std::string data;
  std::string train_data;
  std::vector<std::size_t> instances;
  bool all = false;
  std::string target;
  std::string method = "rt";
  std::string out_dir = ".";
  std::string stem;
  double compactness_e = 1e-9;
  TweakConfig tweak;
  DataOptions io;
};

int run_tweak(const TweakArgs& a) {
  const Method method = parse_method(a.method);
  const auto forest = load_forest(a.model);
  const auto file = parse_ucr(a.data, a.io.parse());
  std::vector<std::size_t> rows = a.instances;
  if (a.all) {
    rows.resize(file.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  } else if (rows.empty()) {
    rows.push_back(0);
  }
  for (auto r : rows) {
    if (r >= file.rows()) {
      throw ContractViolation("instance " + std::to_string(r) + " out of range (file has " +
                              std::to_string(file.rows()) + " rows)");
    }
  }
  std::vector<LabeledSeries> training;
  if (method == Method::nn) {
    if (a.train_data.empty()) throw ContractViolation("--method nn needs --train-data");
    training = parse_ucr(a.train_data, a.io.parse()).records;
  }
  if (!a.target.empty() && !forest.has_label(a.target)) {
    throw ContractViolation("target label '" + a.target + "' is not a forest label");
  }
  if (a.target.empty() && forest.labels().size() != 2) {
    throw ContractViolation("--target-label is required for forests with more than two labels");
  }
  const std::string stem = a.stem.empty() ? fs::path(a.data).stem().string() : a.stem;
  log_config("tweak", {{"model", a.model},
                       {"data", a.data},
                       {"train_data", a.train_data},
                       {"instances", rows},
                       {"target", a.target},
                       {"method", a.method},
                       {"epsilon", a.tweak.epsilon},
                       {"max_increase_iterations", a.tweak.max_increase_iterations},
                       {"early_abandon", a.tweak.early_abandon},
                       {"abort_on_locked_violation", a.tweak.abort_on_locked_violation},
                       {"compactness_e", a.compactness_e},
                       {"out_dir", a.out_dir},
                       {"stem", stem},
                       {"io", a.io.to_json()}});
  fs::create_directories(a.out_dir);

  json reports = json::array();
  std::size_t attempted = 0, succeeded = 0;
  for (std::size_t row : rows) {
    const auto& series = file.records[row].series;
    const std::string before = predict(forest, series);
    const std::string target =
        !a.target.empty() ? a.target : (forest.labels()[0] == before ? forest.labels()[1] : forest.labels()[0]);
    json rep = {{"instance", row}, {"label", file.records[row].label}, {"before", before},
                {"target", target}, {"method", a.method}};
    if (before == target) {
      rep["status"] = "no tweak needed";
      reports.push_back(std::move(rep));
      continue;
    }
    ++attempted;
    const TweakResult r = [&] {
      switch (method) {
        case Method::rt: return tweak_reversible_pruned(forest, series, target, a.tweak);
        case Method::rt_unpruned: return tweak_reversible(forest, series, target, a.tweak);
        case Method::irt: return tweak_irreversible(forest, series, target, a.tweak);
        case Method::nn: return tweak_nn(training, series, target, &forest);
      }
      return tweak_reversible_pruned(forest, series, target, a.tweak);
    }();
    succeeded += r.success;

    const std::string base = rows.size() == 1 ? stem : stem + "-" + std::to_string(row);
    const fs::path original_file = fs::path(a.out_dir) / (base + ".original." + a.method + ".txt");
    const fs::path tweaked_file = fs::path(a.out_dir) / (base + ".tweaked." + a.method + ".txt");
    write_file_atomic(original_file, plot_data(series));
    write_file_atomic(tweaked_file, plot_data(r.transformed));

    rep["status"] = r.success ? "success" : "failed";
    rep["success"] = r.success;
    rep["after"] = predict(forest, r.transformed);
    rep["cost"] = r.cost;
    rep["compactness"] = compactness(series, r.transformed, a.compactness_e);
    rep["edits"] = edits_json(r.edits);
    if (r.candidate) rep["candidate"] = {{"tree", r.candidate->tree_index}, {"path", r.candidate->path_index}};
    rep["stats"] = {{"candidates", r.stats.candidates}, {"predictions", r.stats.predictions},
                    {"abandoned", r.stats.abandoned},   {"aborted", r.stats.aborted},
                    {"capped", r.stats.capped},         {"pruned_fraction", r.stats.pruned_fraction()}};
    if (!r.diagnostic.empty()) rep["diagnostic"] = r.diagnostic;
    rep["files"] = {original_file.string(), tweaked_file.string()};
    reports.push_back(std::move(rep));
  }
  std::cout << json{{"results", std::move(reports)}}.dump(2) << "\n";
  if (attempted == 0) return kNoTweakNeeded;
  return succeeded == attempted ? kOk : kNoSuccess;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::vector<std::string> data;
  std::vector<std::string> methods{"rt", "irt", "nn"};
  std::vector<std::string> pairs;
  std::string out_dir = ".";
  bool serial = false;
  ExperimentConfig config;
  DataOptions io;
};

int run_evaluate(EvaluateArgs a) {
  a.config.methods = MethodSelection{false, false, false, false};
  for (const auto& m : a.methods) {
    switch (parse_method(m)) {
      case Method::rt: a.config.methods.rt = true; break;
      case Method::rt_unpruned: a.config.methods.rt_unpruned = true; break;
      case Method::irt: a.config.methods.irt = true; break;
      case Method::nn: a.config.methods.nn = true; break;
    }
  }
  for (const auto& p : a.pairs) {
    const auto colon = p.find(':');
    if (colon == std::string::npos) throw ContractViolation("label pair '" + p + "' must be source:target");
    a.config.label_pairs.emplace_back(p.substr(0, colon), p.substr(colon + 1));
  }
  a.config.forest.seed = a.config.seed;
  a.config.execution = a.serial ? Execution::serial : Execution::parallel;
  log_config("evaluate", {{"data", a.data},
                          {"methods", a.methods},
                          {"label_pairs", a.pairs},
                          {"test_fraction", a.config.test_fraction},
                          {"compactness_e", a.config.compactness_e},
                          {"seed", a.config.seed},
                          {"epsilon", a.config.tweak.epsilon},
                          {"max_increase_iterations", a.config.tweak.max_increase_iterations},
                          {"abort_on_locked_violation", a.config.tweak.abort_on_locked_violation},
                          {"forest", forest_json(a.config.forest)},
                          {"out_dir", a.out_dir},
                          {"serial", a.serial},
                          {"threads", omp_get_max_threads()},
                          {"io", a.io.to_json()}});

  MetricsReport report;
  for (const auto& path : a.data) {
    const auto file = parse_ucr(path, a.io.parse());
    report.datasets.push_back(run_experiment(fs::path(path).stem().string(), file.records, a.config));
  }
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  const auto tables = format_tables(report);
  write_file_atomic(dir / "metrics.csv", format_metrics_csv(report));
  write_file_atomic(dir / "timing.csv", format_timing_csv(report));
  write_file_atomic(dir / "audit.jsonl", format_audit_jsonl(report));
  write_file_atomic(dir / "tables.txt", tables);
  std::cout << tables;
  return kOk;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  std::string instance;
  std::optional<std::size_t> k;
  double epsilon = 1.0;
};

int run_oracle(const OracleArgs& a) {
  HittingSetInstance inst{3, {{0, 1}, {1, 2}}};
  std::vector<double> start;
  std::string desired = "1";
  std::size_t k = a.k.value_or(0);
  bool k_given = a.k.has_value();
  if (!a.instance.empty()) {
    json j;
    try {
      j = json::parse(read_text(a.instance));
      inst.universe = j.at("universe").get<std::size_t>();
      inst.sets = j.at("sets").get<std::vector<std::vector<std::size_t>>>();
      if (j.contains("series")) start = j.at("series").get<std::vector<double>>();
      if (j.contains("desired")) desired = j.at("desired").get<std::string>();
      if (!k_given && j.contains("k")) {
        k = j.at("k").get<std::size_t>();
        k_given = true;
      }
    } catch (const json::exception& e) {
      throw ParseError(a.instance + ": " + e.what());
    }
  }
  if (start.empty()) start.assign(inst.universe, 0.0);
  if (!k_given) k = start.size();
  log_config("oracle", {{"instance", a.instance.empty() ? "built-in" : a.instance},
                        {"universe", inst.universe},
                        {"sets", inst.sets},
                        {"series", start},
                        {"desired", desired},
                        {"k", k},
                        {"epsilon", a.epsilon}});

  const auto forest = hitting_set_forest(inst);
  const TimeSeries series(start);
  if (series.size() > kBruteForceMaxLength) {
    throw ContractViolation("series length " + std::to_string(series.size()) +
                            " is above the brute-force cap of " +
                            std::to_string(kBruteForceMaxLength) +
                            "; shrink the ground set or use the greedy tweakers instead");
  }
  const auto best = brute_force_min_changes(forest, series, desired, k);

  json out = {{"before", predict(forest, series)}, {"desired", desired}, {"k", k}};
  if (best) {
    out["status"] = "solved";
    out["min_changes"] = best->size();
    out["flips"] = *best;
  } else {
    out["status"] = "no solution within k";
  }
  if (predict(forest, series) != desired) {
    TweakConfig cfg;
    cfg.epsilon = a.epsilon;
    json greedy = json::object();
    for (auto [name, r] : {std::pair{"rt", tweak_reversible_pruned(forest, series, desired, cfg)},
                           std::pair{"irt", tweak_irreversible(forest, series, desired, cfg)}}) {
      greedy[name] = {{"success", r.success},
                      {"cost", r.cost},
                      {"changed_positions", changed_positions(series, r.transformed, 1e-9)}};
    }
    out["greedy"] = std::move(greedy);
  }
  std::cout << out.dump(2) << "\n";
  return best ? kOk : kNoSuccess;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string out;
  PlantedShapeConfig planted;
  std::string delimiter = "comma";
};

int run_generate(const GenerateArgs& a) {
  log_config("generate", {{"out", a.out},
                          {"per_class", a.planted.per_class},
                          {"length", a.planted.length},
                          {"noise", a.planted.noise},
                          {"amplitude", a.planted.amplitude},
                          {"bump_width", a.planted.bump_width},
                          {"seed", a.planted.seed},
                          {"delimiter", a.delimiter}});
  write_ucr(a.out, make_planted_dataset(a.planted), parse_delimiter(a.delimiter));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shapelet forest training and time series tweaking"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a forest and write the model file");
  train_cmd->add_option("--data", train_args.data, "Training data file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--model", train_args.model, "Output model path")->required();
  train_cmd->add_option("--seed", train_args.forest.seed, "RNG seed")->capture_default_str();
  train_cmd->add_option("--test-fraction", train_args.holdout,
                        "Hold out this stratified fraction and report its accuracy")
      ->check(CLI::Range(0.0, 0.99))
      ->capture_default_str();
  add_forest_options(train_cmd, train_args.forest);
  add_data_options(train_cmd, train_args.io);

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Predict every row of a data file");
  predict_cmd->add_option("--model", predict_args.model)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--data", predict_args.data)->required()->check(CLI::ExistingFile);
  add_data_options(predict_cmd, predict_args.io);

  TweakArgs tweak_args;
  auto* tweak_cmd = app.add_subcommand("tweak", "Transform series so the forest predicts a target label");
  tweak_cmd->add_option("--model", tweak_args.model)->required()->check(CLI::ExistingFile);
  tweak_cmd->add_option("--data", tweak_args.data, "File holding the series to tweak")->required()->check(CLI::ExistingFile);
  tweak_cmd->add_option("--instance", tweak_args.instances, "0-based row(s) to tweak (default 0)");
  tweak_cmd->add_flag("--all", tweak_args.all, "Tweak every row");
  tweak_cmd->add_option("--target-label", tweak_args.target, "Desired label (default: the other label)");
  tweak_cmd->add_option("--method", tweak_args.method)
      ->check(CLI::IsMember({"rt", "irt", "nn", "rt-unpruned"}))
      ->capture_default_str();
  tweak_cmd->add_option("--train-data", tweak_args.train_data, "Training data for --method nn")->check(CLI::ExistingFile);
  tweak_cmd->add_option("--epsilon", tweak_args.tweak.epsilon)->check(CLI::PositiveNumber)->capture_default_str();
  tweak_cmd->add_option("--max-increase-iterations", tweak_args.tweak.max_increase_iterations,
                        "Cap on the increase-distance loop (0: 100 x series length)");
  tweak_cmd->add_flag("!--no-early-abandon", tweak_args.tweak.early_abandon, "Disable early abandoning (irt)");
  tweak_cmd->add_flag("!--irt-keep-violations", tweak_args.tweak.abort_on_locked_violation,
                      "irt: stop instead of aborting when only locked windows violate a condition");
  tweak_cmd->add_option("--compactness-e", tweak_args.compactness_e)->check(CLI::NonNegativeNumber)->capture_default_str();
  tweak_cmd->add_option("--out-dir", tweak_args.out_dir, "Directory for plot data")->capture_default_str();
  tweak_cmd->add_option("--stem", tweak_args.stem, "Plot file stem (default: data file stem)");
  add_data_options(tweak_cmd, tweak_args.io);

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Run the cost/compactness/runtime experiment");
  eval_cmd->add_option("--data", eval_args.data, "Dataset file(s)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--method", eval_args.methods, "Methods to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"rt", "irt", "nn", "rt-unpruned"}))
      ->capture_default_str();
  eval_cmd->add_option("--label-pair", eval_args.pairs, "source:target direction (default: both directions of a binary set)");
  eval_cmd->add_option("--seed", eval_args.config.seed, "Split and forest seed")->capture_default_str();
  eval_cmd->add_option("--test-fraction", eval_args.config.test_fraction)->check(CLI::Range(0.01, 0.99))->capture_default_str();
  eval_cmd->add_option("--compactness-e", eval_args.config.compactness_e)->check(CLI::NonNegativeNumber)->capture_default_str();
  eval_cmd->add_option("--epsilon", eval_args.config.tweak.epsilon)->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--max-increase-iterations", eval_args.config.tweak.max_increase_iterations);
  eval_cmd->add_flag("!--irt-keep-violations", eval_args.config.tweak.abort_on_locked_violation,
                     "irt: stop instead of aborting when only locked windows violate a condition");
  eval_cmd->add_option("--out-dir", eval_args.out_dir)->capture_default_str();
  eval_cmd->add_flag("--serial", eval_args.serial, "Run without OpenMP parallelism");
  add_forest_options(eval_cmd, eval_args.config.forest);
  add_data_options(eval_cmd, eval_args.io);

  OracleArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact minimum flip count on a hitting-set toy forest");
  oracle_cmd->add_option("--instance", oracle_args.instance,
                         "JSON {universe, sets, [series], [desired], [k]} (default: built-in)")
      ->check(CLI::ExistingFile);
  oracle_cmd->add_option("--k", oracle_args.k, "Flip budget (default: series length)");
  oracle_cmd->add_option("--epsilon", oracle_args.epsilon)->check(CLI::PositiveNumber)->capture_default_str();

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "Write a planted-shape two-class dataset");
  gen_cmd->add_option("--out", gen_args.out)->required();
  gen_cmd->add_option("--per-class", gen_args.planted.per_class)->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--length", gen_args.planted.length)->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--noise", gen_args.planted.noise)->capture_default_str();
  gen_cmd->add_option("--amplitude", gen_args.planted.amplitude)->capture_default_str();
  gen_cmd->add_option("--bump-width", gen_args.planted.bump_width)->capture_default_str();
  gen_cmd->add_option("--seed", gen_args.planted.seed)->capture_default_str();
  gen_cmd->add_option("--delimiter", gen_args.delimiter)
      ->check(CLI::IsMember({"comma", "tab", "whitespace"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*train_cmd) return run_train(train_args);
    if (*predict_cmd) return run_predict(predict_args);
    if (*tweak_cmd) return run_tweak(tweak_args);
    if (*eval_cmd) return run_evaluate(eval_args);
    if (*oracle_cmd) return run_oracle(oracle_args);
    if (*gen_cmd) return run_generate(gen_args);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kContract;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kContract;
  } catch (const ExperimentError& e) {
    std::cerr << "experiment error: " << e.what() << "\n";
    return kContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
