#include "shapetweak/forest_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shapetweak/dataset.hpp"
#include "shapetweak/errors.hpp"

namespace shapetweak {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "shapetweak-forest";

json params_to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"shapelets_per_node", p.shapelets_per_node},
          {"min_shapelet_length", p.min_shapelet_length},
          {"max_shapelet_length", p.max_shapelet_length},
          {"seed", p.seed},
          {"bootstrap", p.bootstrap}};
}

ForestParams params_from_json(const json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<std::size_t>();
  p.shapelets_per_node = j.at("shapelets_per_node").get<std::size_t>();
  p.min_shapelet_length = j.at("min_shapelet_length").get<std::size_t>();
  p.max_shapelet_length = j.at("max_shapelet_length").get<std::size_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  return p;
}

}  // namespace

std::string serialize_forest(const ShapeletForest& forest) {
  json trees = json::array();
  for (const auto& tree : forest.trees()) {
    json nodes = json::array();
    for (const auto& node : tree.nodes()) {
      if (const auto* split = std::get_if<SplitNode>(&node)) {
        nodes.push_back({{"shapelet", split->shapelet.values()},
                         {"threshold", split->threshold},
                         {"left", split->left},
                         {"right", split->right}});
      } else {
        nodes.push_back({{"leaf", std::get<LeafNode>(node).label}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  json doc = {{"format", kFormatName},
              {"version", kForestFormatVersion},
              {"params", params_to_json(forest.params())},
              {"labels", forest.labels()},
              {"trees", std::move(trees)}};
  return doc.dump() + "\n";
}

ShapeletForest deserialize_forest(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormatName) {
      throw ParseError("not a shapetweak forest model");
    }
    const int version = doc.at("version").get<int>();
    if (version != kForestFormatVersion) {
      throw ParseError("unsupported model version " + std::to_string(version));
    }
    auto labels = doc.at("labels").get<std::vector<std::string>>();
    std::vector<ShapeletTree> trees;
    for (const auto& jt : doc.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& jn : jt.at("nodes")) {
        if (jn.contains("leaf")) {
          nodes.emplace_back(LeafNode{jn.at("leaf").get<std::uint32_t>()});
        } else {
          nodes.emplace_back(SplitNode{Shapelet(jn.at("shapelet").get<std::vector<double>>()),
                                       jn.at("threshold").get<double>(),
                                       jn.at("left").get<std::uint32_t>(),
                                       jn.at("right").get<std::uint32_t>()});
        }
      }
      trees.emplace_back(std::move(nodes), labels.size());
    }
    return ShapeletForest(std::move(trees), std::move(labels), params_from_json(doc.at("params")));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("inconsistent model: ") + e.what());
  }
}

void save_forest(const ShapeletForest& forest, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_forest(forest));
}

ShapeletForest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open model file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_forest(buf.str());
}

}  // namespace shapetweak
