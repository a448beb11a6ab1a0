#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cipwave {

/// Uniform node-centred Cartesian grid on a rectangle, together with the
/// time axis of the explicit scheme.
///
/// Nodes are numbered row-major: node (i, j) with 0 <= i <= nx, 0 <= j <= ny
/// sits at (x0 + i*h, y0 + j*h) and has flat index j*(nx+1) + i.
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double lx = 1.0;
  double ly = 1.0;
  double h = 0.0;
  double dt = 0.0;
  int nt = 0;
  double T = 0.0;
  int level = 0;
  // Kept so that refine() can reapply the same time-step rule.
  double cfl_safety = 0.5;
  double eps_min = 1.0;

  [[nodiscard]] int nodes_x() const { return nx + 1; }
  [[nodiscard]] int nodes_y() const { return ny + 1; }
  [[nodiscard]] std::size_t node_count() const {
    return static_cast<std::size_t>(nx + 1) * static_cast<std::size_t>(ny + 1);
  }
  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx + 1) +
           static_cast<std::size_t>(i);
  }
  [[nodiscard]] double x(int i) const { return x0 + i * h; }
  [[nodiscard]] double y(int j) const { return y0 + j * h; }
  [[nodiscard]] double t(int n) const { return n * dt; }

  /// Tensor trapezoid weight of node (i, j): h^2 inside, h^2/2 on edges,
  /// h^2/4 at corners.
  [[nodiscard]] double area_weight(int i, int j) const;

  /// Trapezoid weight of time level n: dt inside, dt/2 at 0 and nt.
  [[nodiscard]] double time_weight(int n) const;

  /// Largest stable step of the explicit scheme for wave speed 1/sqrt(eps_min).
  [[nodiscard]] static double cfl_limit(double h, double eps_min);

  bool operator==(const Grid2D&) const = default;
};

struct Extent {
  double x0 = 0.0;
  double y0 = 0.0;
  double lx = 1.0;
  double ly = 1.0;
};

/// Builds a grid with dt = cfl_safety * h * sqrt(eps_min) / sqrt(2), shrunk
/// so that T is an integer number of steps.
///
/// Throws std::invalid_argument for nx or ny below 8, non-square cells,
/// T <= 0, cfl_safety outside (0, 1) or eps_min < 1.
Grid2D build_grid(int nx, int ny, double T, double cfl_safety = 0.5,
                  double eps_min = 1.0, Extent extent = {});

/// Factor-2 nested refinement; the time step is recomputed by the same rule.
Grid2D refine(const Grid2D& grid);

/// True when every node of `coarse` is a node of `fine` and both share the
/// same extent and final time.
bool is_nested_refinement(const Grid2D& coarse, const Grid2D& fine);

enum class Region : std::uint8_t { inner, frame };

/// Classification of nodes into the update region and the pinned frame of
/// the outermost `frame_width` node layers.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(const Grid2D& grid, int frame_width);

  [[nodiscard]] int frame_width() const { return frame_width_; }
  [[nodiscard]] Region at(std::size_t node) const { return regions_[node]; }
  [[nodiscard]] bool is_frame(std::size_t node) const {
    return regions_[node] == Region::frame;
  }
  [[nodiscard]] std::size_t size() const { return regions_.size(); }
  [[nodiscard]] std::size_t frame_count() const;
  [[nodiscard]] std::size_t inner_count() const { return size() - frame_count(); }

  bool operator==(const RegionMask&) const = default;

 private:
  int frame_width_ = 0;
  std::vector<Region> regions_;
};

/// Throws std::invalid_argument when 2*frame_width >= min(nx, ny).
RegionMask region_mask(const Grid2D& grid, int frame_width);

}  // namespace cipwave
