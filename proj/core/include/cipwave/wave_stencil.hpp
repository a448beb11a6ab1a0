#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "cipwave/fields.hpp"
#include "cipwave/grid.hpp"

namespace cipwave {

/// Boundary treatment of one side during one time step.
///
/// A side is either a Neumann side with prescribed outward normal derivative
/// `flux + nodal_flux[k]`, or an absorbing side where the same data is added
/// to the condition d_n E = -d_t E. Both are realised with ghost nodes, so
/// a flux g contributes (2/h) g to the discrete Laplacian at the side nodes.
struct SideCondition {
  bool absorbing = false;
  // Damping applied to the old level E^{n-1} when it differs from the one
  // applied to E^{n+1} (a side whose absorbing status switches mid-run).
  std::optional<bool> absorbing_prev;
  double flux = 0.0;
  std::span<const double> nodal_flux;  // empty or side_length() values
};

using SideConditions = std::array<SideCondition, 4>;  // indexed by Side - 1

/// The explicit leapfrog discretisation of eps E_tt + sigma E_t - Lap E = f.
///
/// Step n advances E^{n-1}, E^n to E^{n+1}:
///   (eps/dt^2 + s/(2dt)) E^{n+1} = (2 eps/dt^2) E^n
///       - (eps/dt^2 - s/(2dt)) E^{n-1} + Lap_h E^n + f^n
/// where s = sigma + (2/h) * (number of absorbing sides through the node),
/// i.e. the absorbing condition uses the centred difference of E_t.
class WaveStencil {
 public:
  WaveStencil(const Grid2D& grid, std::span<const double> eps,
              std::span<const double> sigma);

  [[nodiscard]] const Grid2D& grid() const { return grid_; }

  /// Five-point Laplacian with mirror ghosts plus (2/h) * flux on each side.
  void laplacian(std::span<const double> u, const SideConditions& sides,
                 std::span<double> out) const;

  /// First level from the Taylor start
  /// E^1 = f0 + dt f1 + dt^2/(2 eps) (Lap_h f0 - sigma f1 + f^0);
  /// absorbing sides see the flux -f1. Empty f0/f1/forcing mean zero.
  void start(std::span<const double> f0, std::span<const double> f1,
             const SideConditions& sides, std::span<const double> forcing,
             std::span<double> next) const;

  void step(std::span<const double> prev, std::span<const double> curr,
            const SideConditions& sides, std::span<const double> forcing,
            std::span<double> next) const;

  /// Residual of the step equation, in the scaling of the update above.
  void step_defect(std::span<const double> prev, std::span<const double> curr,
                   std::span<const double> next, const SideConditions& sides,
                   std::span<const double> forcing, std::span<double> out) const;

  /// (2 eps/dt^2)(E^1 - f0 - dt f1) - (Lap_h f0 - sigma f1 + f^0).
  void start_defect(std::span<const double> f0, std::span<const double> f1,
                    std::span<const double> next, const SideConditions& sides,
                    std::span<const double> forcing, std::span<double> out) const;

  /// Number of absorbing sides through each node for the given conditions.
  [[nodiscard]] int absorbing_count(int i, int j, const SideConditions& sides) const;

 private:
  void add_flux(const SideConditions& sides, std::span<const double> f1,
                std::span<double> out) const;
  [[nodiscard]] double extra_damping(std::size_t node, const SideConditions& sides,
                                     bool old_level) const;

  Grid2D grid_;
  std::span<const double> eps_;
  std::span<const double> sigma_;
  std::vector<double> a_;  // eps/dt^2 + sigma/(2dt)
  std::vector<double> b_;  // eps/dt^2 - sigma/(2dt)
  std::vector<double> c_;  // 2 eps/dt^2
  std::vector<std::size_t> boundary_nodes_;
};

/// Edge form a(u, v) = sum_e c_e (u_j - u_i)(v_j - v_i) with c_e = 1 inside
/// and 1/2 along the boundary, so that a(u, v) = -(Lap_h u, v) in the nodal
/// trapezoid inner product for zero flux.
double gradient_form(const Grid2D& grid, std::span<const double> u,
                     std::span<const double> v);

/// Nodal trapezoid inner product over the domain.
double area_dot(const Grid2D& grid, std::span<const double> u,
                std::span<const double> v);

}  // namespace cipwave
