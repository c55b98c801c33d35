#pragma once

#include <random>
#include <vector>

#include "finsler/models.hpp"

namespace testing {

inline finsler::Vector random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  finsler::Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline std::vector<finsler::ChartPoint> sample_points(const finsler::ChartAtlas& atlas, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<finsler::ChartPoint> out;
  for (int i = 0; i < count; ++i) out.push_back(atlas.sample(rng));
  return out;
}

inline finsler::ModelBundle flat_toy() {
  return finsler::make_model({{"model", "flat-randers"}, {"n", 2}, {"wind_vector", {0.5, 0.0}}});
}

inline finsler::ModelBundle randers_rotation(int n, double a = 0.3) {
  return finsler::make_model({{"model", "randers-nav"}, {"n", n}, {"k", 1.0}, {"wind", "rotation"}, {"a", a}});
}

inline finsler::ModelBundle randers_gradient(int n, double a = 0.2) {
  return finsler::make_model({{"model", "randers-nav"}, {"n", n}, {"k", 1.0}, {"wind", "gradient"}, {"a", a}});
}

}  // namespace testing
