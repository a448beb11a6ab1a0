#pragma once

#include <vector>

#include "cipwave/fields.hpp"
#include "cipwave/forward_solver.hpp"

namespace cipwave {

/// Backward-in-time adjoint problem
///   eps l_tt - sigma l_t - Lap l = 0,  l(T) = l_t(T) = 0,
///   d_n l = -(E - E_obs) on the observed sides.
///
/// Solved with the forward stencil in reversed time s = T - t, where the
/// damping term keeps its forward sign. Sides that absorb in the forward
/// problem at time t absorb in reversed time; the residual is added as a
/// Neumann flux on the sides present in `residual`. `forward_src` supplies
/// the switch time of the source side.
SpaceTimeField solve_adjoint(const Grid2D& grid, const CoefficientField& eps,
                             const CoefficientField& sigma,
                             const BoundaryTrace& residual, const BcConfig& bc,
                             const SourceSpec& forward_src = {});

struct AdjointEnergyReport {
  std::vector<double> energy;  // per level 1..nt (index n-1)
  double max_energy = 0.0;
  double residual_norm_sq = 0.0;  // ||residual||^2 over the observed space-time boundary
  double ratio = 0.0;             // max_energy / residual_norm_sq, 0 when both vanish
  bool unbounded = false;
};

/// Tracks the discrete adjoint energy against the driving residual and flags
/// ratios above `c_max`.
AdjointEnergyReport adjoint_energy_monitor(const SpaceTimeField& lambda,
                                           const CoefficientField& eps,
                                           const BoundaryTrace& residual,
                                           double c_max = 1e6);

}  // namespace cipwave
