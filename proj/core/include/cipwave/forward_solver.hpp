#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cipwave/fields.hpp"
#include "cipwave/grid.hpp"
#include "cipwave/wave_stencil.hpp"

namespace cipwave {

enum class BoundaryKind : std::uint8_t { source_then_absorbing, absorbing, neumann_zero };

std::string to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(const std::string& name);

/// Per-side boundary conditions. At most one side carries the source.
struct BcConfig {
  std::array<BoundaryKind, 4> kinds = {
      BoundaryKind::source_then_absorbing,  // left
      BoundaryKind::neumann_zero,           // bottom
      BoundaryKind::absorbing,              // right
      BoundaryKind::neumann_zero};          // top

  [[nodiscard]] BoundaryKind at(Side s) const {
    return kinds[static_cast<std::size_t>(s) - 1];
  }
  void set(Side s, BoundaryKind k) { kinds[static_cast<std::size_t>(s) - 1] = k; }
  void validate() const;

  static BcConfig all_neumann();
};

/// Nodal volume forcing at time level n, written into `out`.
using VolumeForcing = std::function<void(int n, double t, std::span<double> out)>;

/// Plane-wave boundary source d_n E = amplitude * sin(omega t) for t <= t_on
/// on the source side, plus optional volume forcing and initial data.
struct SourceSpec {
  double omega = 20.0;
  double t_on = 2.0 * std::numbers::pi / 20.0;
  double amplitude = 1.0;
  VolumeForcing forcing;
  std::vector<double> f0;  // E(x, 0); empty means zero
  std::vector<double> f1;  // d_t E(x, 0); empty means zero

  [[nodiscard]] bool active(double t) const { return t <= t_on; }
  [[nodiscard]] double flux(double t) const {
    return active(t) ? amplitude * std::sin(omega * t) : 0.0;
  }
  void validate() const;
};

/// Side conditions used for the update out of level n.
using BoundarySchedule = std::function<void(int n, SideConditions& sides)>;

/// General explicit propagation: levels 0..nt of the leapfrog scheme with
/// the given boundary schedule. With `reverse_time` the solver level m is
/// stored as snapshot nt - m, so a backward-in-time problem is returned in
/// forward time order.
struct WaveProblem {
  Grid2D grid;
  std::span<const double> eps;
  std::span<const double> sigma;
  BoundarySchedule boundary;
  VolumeForcing forcing;
  std::span<const double> f0;
  std::span<const double> f1;
  bool reverse_time = false;
  /// Build level 1 with an ordinary step out of E^0 = E^{-1} = 0 instead of
  /// the Taylor start (f0, f1 and forcing at level 0 must then be empty).
  bool start_from_rest = false;
  SpaceTimeRole role = SpaceTimeRole::state;
};

/// Throws NumericalError when dt exceeds the stability bound for min eps or
/// when a non-finite value appears.
SpaceTimeField propagate(const WaveProblem& problem);

/// Side conditions of the forward problem at time t.
SideConditions forward_conditions(const BcConfig& bc, const SourceSpec& src, double t);

/// Checks dt <= h sqrt(min eps) / sqrt(2).
void check_cfl(const Grid2D& grid, std::span<const double> eps);

SpaceTimeField solve_forward(const Grid2D& grid, const CoefficientField& eps,
                             const CoefficientField& sigma, const SourceSpec& src,
                             const BcConfig& bc);

/// Everything but the coefficients needed to simulate observations.
struct ForwardModel {
  Grid2D grid;
  SourceSpec source;
  BcConfig bc;
  SideSet observed = SideSet::all();

  [[nodiscard]] SpaceTimeField solve(const CoefficientField& eps,
                                     const CoefficientField& sigma) const {
    return solve_forward(grid, eps, sigma, source, bc);
  }
};

/// Discrete energy between levels n-1 and n:
///   ||(E^n - E^{n-1})/dt||^2_eps + a(E^n, E^{n-1})
/// with the edge form a() of the five-point Laplacian. This is the quantity
/// the leapfrog scheme conserves exactly without damping or sources; it is
/// non-negative under the CFL bound.
double discrete_energy(const SpaceTimeField& field, const CoefficientField& eps, int n);

/// Writes `<prefix><step>.vtk` for every k-th level.
void dump_snapshots(const SpaceTimeField& field, const std::filesystem::path& dir,
                    const std::string& prefix, int every);

}  // namespace cipwave
