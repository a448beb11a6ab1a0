#include "cipwave/adjoint_solver.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "cipwave/objective.hpp"

namespace cipwave {

SpaceTimeField solve_adjoint(const Grid2D& grid, const CoefficientField& eps,
                             const CoefficientField& sigma,
                             const BoundaryTrace& residual, const BcConfig& bc,
                             const SourceSpec& forward_src) {
  if (!(residual.grid() == grid)) {
    throw std::invalid_argument("residual trace does not match the grid or time levels");
  }
  if (!(eps.grid == grid) || !(sigma.grid == grid)) {
    throw std::invalid_argument("coefficients live on a different grid");
  }
  bc.validate();

  // d_n l = -r: store the negated residual once.
  BoundaryTrace flux = residual;
  for (double& v : flux.data()) v = -v;
  for (Side s : flux.sides().list()) {
    for (double& v : flux.side_values(grid.nt, s)) v *= 0.5;
  }

  const int nt = grid.nt;
  auto absorbing_at = [&](Side s, int n) {
    switch (bc.at(s)) {
      case BoundaryKind::neumann_zero: return false;
      case BoundaryKind::absorbing: return true;
      case BoundaryKind::source_then_absorbing: return !forward_src.active(grid.t(n));
    }
    return false;
  };

  // This is the transpose of the forward scheme run backwards. The update at
  // forward level n produces lambda^{n-1} from lambda^n and lambda^{n+1}; the
  // damping on each of the outer levels is the one the forward scheme applied
  // at that level. The terminal data lambda^nt = 0 make the first update a
  // step from rest driven by half the residual (trapezoid end weight).
  WaveProblem p;
  p.grid = grid;
  p.eps = eps.values;
  p.sigma = sigma.values;
  p.reverse_time = true;
  p.start_from_rest = true;
  p.role = SpaceTimeRole::adjoint;
  p.boundary = [&](int m, SideConditions& sides) {
    const int n = nt - m;
    sides = SideConditions{};
    for (Side s : kAllSides) {
      SideCondition& c = sides[static_cast<std::size_t>(s) - 1];
      c.absorbing = absorbing_at(s, n - 1);
      if (n + 1 <= nt) c.absorbing_prev = absorbing_at(s, n + 1);
      if (flux.sides().contains(s)) c.nodal_flux = flux.side_values(n, s);
    }
  };
  return propagate(p);
}

AdjointEnergyReport adjoint_energy_monitor(const SpaceTimeField& lambda,
                                           const CoefficientField& eps,
                                           const BoundaryTrace& residual,
                                           double c_max) {
  AdjointEnergyReport report;
  const Grid2D& g = lambda.grid();
  report.energy.reserve(static_cast<std::size_t>(g.nt));
  for (int n = 1; n <= g.nt; ++n) {
    const double e = discrete_energy(lambda, eps, n);
    report.energy.push_back(e);
    report.max_energy = std::max(report.max_energy, e);
  }
  report.residual_norm_sq = boundary_dot(residual, residual);
  if (report.residual_norm_sq > 0.0) {
    report.ratio = report.max_energy / report.residual_norm_sq;
  } else if (report.max_energy > 0.0) {
    report.ratio = std::numeric_limits<double>::infinity();
  }
  report.unbounded = report.ratio > c_max;
  return report;
}

}  // namespace cipwave
