#include "cipwave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cipwave {

double Grid2D::area_weight(int i, int j) const {
  double w = h * h;
  if (i == 0 || i == nx) w *= 0.5;
  if (j == 0 || j == ny) w *= 0.5;
  return w;
}

double Grid2D::time_weight(int n) const {
  return (n == 0 || n == nt) ? 0.5 * dt : dt;
}

double Grid2D::cfl_limit(double h, double eps_min) {
  return h * std::sqrt(eps_min) / std::sqrt(2.0);
}

Grid2D build_grid(int nx, int ny, double T, double cfl_safety, double eps_min,
                  Extent extent) {
  if (nx < 8 || ny < 8) {
    throw std::invalid_argument("grid needs at least 8 cells per axis, got " +
                                std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (!(T > 0.0)) throw std::invalid_argument("final time T must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety < 1.0)) {
    throw std::invalid_argument("cfl_safety must lie in (0, 1)");
  }
  if (!(eps_min >= 1.0)) throw std::invalid_argument("eps_min must be >= 1");
  if (!(extent.lx > 0.0 && extent.ly > 0.0)) {
    throw std::invalid_argument("domain extent must be positive");
  }
  const double hx = extent.lx / nx;
  const double hy = extent.ly / ny;
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy)) {
    throw std::invalid_argument("cells must be square: extent/nx != extent/ny");
  }

  Grid2D g;
  g.nx = nx;
  g.ny = ny;
  g.x0 = extent.x0;
  g.y0 = extent.y0;
  g.lx = extent.lx;
  g.ly = extent.ly;
  g.h = hx;
  g.T = T;
  g.cfl_safety = cfl_safety;
  g.eps_min = eps_min;

  const double dt_max = cfl_safety * Grid2D::cfl_limit(hx, eps_min);
  // The 1e-9 slack keeps an exact multiple from being bumped to nt + 1.
  g.nt = static_cast<int>(std::ceil(T / dt_max - 1e-9));
  g.nt = std::max(g.nt, 1);
  g.dt = T / g.nt;
  return g;
}

Grid2D refine(const Grid2D& grid) {
  Grid2D fine = build_grid(2 * grid.nx, 2 * grid.ny, grid.T, grid.cfl_safety,
                           grid.eps_min, {grid.x0, grid.y0, grid.lx, grid.ly});
  fine.level = grid.level + 1;
  return fine;
}

bool is_nested_refinement(const Grid2D& coarse, const Grid2D& fine) {
  const double tol = 1e-14 * std::max(1.0, std::abs(coarse.lx));
  return fine.nx == 2 * coarse.nx && fine.ny == 2 * coarse.ny &&
         std::abs(fine.x0 - coarse.x0) <= tol &&
         std::abs(fine.y0 - coarse.y0) <= tol &&
         std::abs(fine.lx - coarse.lx) <= tol &&
         std::abs(fine.ly - coarse.ly) <= tol &&
         std::abs(fine.T - coarse.T) <= 1e-12 * coarse.T;
}

RegionMask::RegionMask(const Grid2D& grid, int frame_width)
    : frame_width_(frame_width), regions_(grid.node_count(), Region::inner) {
  if (frame_width < 0 || 2 * frame_width >= std::min(grid.nx, grid.ny)) {
    throw std::invalid_argument("frame width " + std::to_string(frame_width) +
                                " too wide for a " + std::to_string(grid.nx) +
                                "x" + std::to_string(grid.ny) + " grid");
  }
  for (int j = 0; j <= grid.ny; ++j) {
    for (int i = 0; i <= grid.nx; ++i) {
      const bool frame = i < frame_width || j < frame_width ||
                         i > grid.nx - frame_width || j > grid.ny - frame_width;
      if (frame) regions_[grid.index(i, j)] = Region::frame;
    }
  }
}

std::size_t RegionMask::frame_count() const {
  return static_cast<std::size_t>(
      std::count(regions_.begin(), regions_.end(), Region::frame));
}

RegionMask region_mask(const Grid2D& grid, int frame_width) {
  return RegionMask(grid, frame_width);
}

}  // namespace cipwave
