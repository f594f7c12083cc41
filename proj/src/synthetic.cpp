#include "shapetweak/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "shapetweak/errors.hpp"

namespace shapetweak {

std::vector<LabeledSeries> make_planted_dataset(const PlantedShapeConfig& config) {
  if (config.length < config.bump_width || config.bump_width == 0 || config.per_class == 0) {
    throw ContractViolation("planted dataset needs 0 < bump_width <= length and per_class > 0");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, config.noise);
  std::uniform_int_distribution<std::size_t> where(0, config.length - config.bump_width);

  const double sigma = static_cast<double>(config.bump_width) / 6.0;
  const double mid = static_cast<double>(config.bump_width - 1) / 2.0;

  std::vector<LabeledSeries> rows;
  rows.reserve(2 * config.per_class);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < config.per_class; ++i) {
      std::vector<double> v(config.length);
      for (double& x : v) x = noise(rng);
      if (c == 0) {
        const std::size_t at = where(rng);
        for (std::size_t k = 0; k < config.bump_width; ++k) {
          const double z = (static_cast<double>(k) - mid) / sigma;
          v[at + k] += config.amplitude * std::exp(-0.5 * z * z);
        }
      }
      rows.push_back({c == 0 ? config.bump_label : config.flat_label, TimeSeries(std::move(v))});
    }
  }
  std::shuffle(rows.begin(), rows.end(), rng);
  return rows;
}

}  // namespace shapetweak
