#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "cipwave/fields.hpp"
#include "cipwave/forward_solver.hpp"

namespace cipwave::fixture {

inline CoefficientField test1_eps(const Grid2D& g) {
  return gaussian_coefficient(g, Role::epsilon, 1.0, 3.0, 0.5, 0.7, 0.002);
}

inline CoefficientField test1_sigma(const Grid2D& g) {
  return gaussian_coefficient(g, Role::sigma, 1.0, 1.5, 0.5, 0.7, 0.002);
}

inline ForwardModel small_model(int nx = 16, double T = 1.2) {
  ForwardModel m;
  m.grid = build_grid(nx, nx, T, 0.5, 1.0);
  return m;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cipwave_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cipwave::fixture
