#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cipwave/grid.hpp"

namespace cipwave {

enum class Role : std::uint8_t { epsilon, sigma };

std::string to_string(Role role);

/// Box constraints and background values of the two coefficients.
struct AdmissibleSet {
  double eps_background = 1.0;
  double eps_max = 10.0;
  double sigma_background = 1.0;
  double sigma_min = 1.0;
  double sigma_max = 10.0;

  [[nodiscard]] double lower(Role role) const;
  [[nodiscard]] double upper(Role role) const;
  [[nodiscard]] double background(Role role) const;

  /// Throws std::invalid_argument when the bounds are inconsistent.
  void validate() const;
};

/// Nodal coefficient (permittivity or scaled conductivity) on a grid.
struct CoefficientField {
  Grid2D grid;
  Role role = Role::epsilon;
  std::vector<double> values;

  CoefficientField() = default;
  CoefficientField(const Grid2D& g, Role r, double value = 0.0)
      : grid(g), role(r), values(g.node_count(), value) {}

  [[nodiscard]] double at(int i, int j) const { return values[grid.index(i, j)]; }
  double& at(int i, int j) { return values[grid.index(i, j)]; }
  [[nodiscard]] double min() const;
  [[nodiscard]] double max() const;
};

enum class SpaceTimeRole : std::uint8_t { state, adjoint };

/// All time levels 0..nt of a nodal field, stored contiguously by level.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(const Grid2D& grid, SpaceTimeRole role);

  [[nodiscard]] const Grid2D& grid() const { return grid_; }
  [[nodiscard]] SpaceTimeRole role() const { return role_; }
  [[nodiscard]] int levels() const { return grid_.nt + 1; }

  [[nodiscard]] std::span<const double> snapshot(int n) const;
  std::span<double> snapshot(int n);

  [[nodiscard]] std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

 private:
  Grid2D grid_;
  SpaceTimeRole role_ = SpaceTimeRole::state;
  std::vector<double> data_;
};

/// Sides of the rectangle, numbered as in the trace file format.
enum class Side : std::uint8_t { left = 1, bottom = 2, right = 3, top = 4 };

inline constexpr std::array<Side, 4> kAllSides = {Side::left, Side::bottom,
                                                  Side::right, Side::top};

class SideSet {
 public:
  constexpr SideSet() = default;
  SideSet(std::initializer_list<Side> sides);
  static SideSet all() { return {Side::left, Side::bottom, Side::right, Side::top}; }

  [[nodiscard]] bool contains(Side s) const { return (bits_ >> bit(s)) & 1U; }
  void insert(Side s) { bits_ |= static_cast<std::uint8_t>(1U << bit(s)); }
  [[nodiscard]] bool empty() const { return bits_ == 0; }
  [[nodiscard]] std::vector<Side> list() const;

  bool operator==(const SideSet&) const = default;

 private:
  static unsigned bit(Side s) { return static_cast<unsigned>(s) - 1U; }
  std::uint8_t bits_ = 0;
};

/// Number of nodes along a side, endpoints included.
int side_length(const Grid2D& grid, Side side);

/// Flat node index of the k-th node along a side (k grows with x or y).
std::size_t side_node(const Grid2D& grid, Side side, int k);

/// Values at the boundary nodes of the declared sides for every time level.
/// Corner nodes appear once per side that contains them.
class BoundaryTrace {
 public:
  BoundaryTrace() = default;
  BoundaryTrace(const Grid2D& grid, SideSet sides);

  [[nodiscard]] const Grid2D& grid() const { return grid_; }
  [[nodiscard]] SideSet sides() const { return sides_; }
  [[nodiscard]] int levels() const { return grid_.nt + 1; }
  [[nodiscard]] std::size_t values_per_level() const { return per_level_; }

  /// Distinct boundary nodes covered by the declared sides.
  [[nodiscard]] std::size_t boundary_node_count() const;

  [[nodiscard]] std::span<const double> side_values(int n, Side side) const;
  std::span<double> side_values(int n, Side side);

  [[nodiscard]] std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// True when grid, sides and time levels agree.
  [[nodiscard]] bool compatible_with(const BoundaryTrace& other) const;

 private:
  [[nodiscard]] std::size_t offset(int n, Side side) const;

  Grid2D grid_;
  SideSet sides_;
  std::array<std::size_t, 4> side_offset_{};
  std::size_t per_level_ = 0;
  std::vector<double> data_;
};

/// base + amp * exp(-((x-cx)^2 + (y-cy)^2) / width) at every node.
CoefficientField gaussian_coefficient(const Grid2D& grid, Role role, double base,
                                      double amp, double cx, double cy,
                                      double width);

/// Adds scale * X^2 Y^2 (1-X)^2 (1-Y)^2 with X, Y the coordinates normalised
/// to [0, 1] over the domain.
CoefficientField add_bubble(const CoefficientField& field, double scale);

/// Clamps inner values into the admissible box and pins frame nodes to the
/// background.
CoefficientField project(const CoefficientField& field, const AdmissibleSet& adm,
                         const RegionMask& mask);

enum class NoiseModel : std::uint8_t { additive_gaussian, relative_gaussian };

std::string to_string(NoiseModel model);
NoiseModel noise_model_from_string(const std::string& name);

/// Adds i.i.d. zero-mean Gaussian noise with standard deviation `level`
/// (additive) or level * max|trace| (relative). The noise sequence depends
/// only on the seed and the trace layout.
BoundaryTrace add_noise(const BoundaryTrace& trace, NoiseModel model,
                        double level, std::uint64_t seed);

BoundaryTrace extract_trace(const SpaceTimeField& field, SideSet sides);

/// sim - obs on the common sides.
BoundaryTrace trace_difference(const BoundaryTrace& sim, const BoundaryTrace& obs);

/// Bilinear interpolation onto the factor-2 refinement.
CoefficientField transfer_to_refined(const CoefficientField& field,
                                     const Grid2D& fine_grid);

/// Linear interpolation in time onto the fine time levels, injection at
/// coincident boundary nodes and midpoint averaging in between.
BoundaryTrace transfer_to_refined(const BoundaryTrace& trace,
                                  const Grid2D& fine_grid);

/// Injection of a fine field onto the coarse nodes.
CoefficientField restrict_to_coarse(const CoefficientField& fine,
                                    const Grid2D& coarse_grid);

}  // namespace cipwave
