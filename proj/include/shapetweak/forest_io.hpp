#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "shapetweak/forest.hpp"

namespace shapetweak {

inline constexpr int kForestFormatVersion = 1;

// JSON document:
//   { "format": "shapetweak-forest", "version": 1,
//     "params": {...}, "labels": [...],
//     "trees": [ { "nodes": [ {"leaf": <label index>} |
//                             {"shapelet": [...], "threshold": t,
//                              "left": i, "right": j} ] } ] }
// Doubles are written in shortest round-trip form, so load(save(f)) == f.
std::string serialize_forest(const ShapeletForest& forest);
ShapeletForest deserialize_forest(const std::string& text);

void save_forest(const ShapeletForest& forest, const std::filesystem::path& path);
ShapeletForest load_forest(const std::filesystem::path& path);

}  // namespace shapetweak
