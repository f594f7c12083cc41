#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "shapetweak/series.hpp"

namespace shapetweak {

// Two-class benchmark: Gaussian noise everywhere, plus a Gaussian bump at a
// random position for `bump_label` series. The other class is noise only.
struct PlantedShapeConfig {
  std::size_t per_class = 125;
  std::size_t length = 64;
  double noise = 0.5;
  double amplitude = 3.0;
  std::size_t bump_width = 12;
  std::uint64_t seed = 0;
  std::string bump_label = "1";
  std::string flat_label = "-1";
};

/// Rows are shuffled with the same seed, so the class order is mixed.
std::vector<LabeledSeries> make_planted_dataset(const PlantedShapeConfig& config);

}  // namespace shapetweak
