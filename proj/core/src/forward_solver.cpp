#include "cipwave/forward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cipwave/errors.hpp"
#include "cipwave/field_io.hpp"

namespace cipwave {

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::source_then_absorbing:
      return "source";
    case BoundaryKind::absorbing:
      return "absorbing";
    case BoundaryKind::neumann_zero:
      return "neumann";
  }
  return "?";
}

BoundaryKind boundary_kind_from_string(const std::string& name) {
  if (name == "source") return BoundaryKind::source_then_absorbing;
  if (name == "absorbing") return BoundaryKind::absorbing;
  if (name == "neumann") return BoundaryKind::neumann_zero;
  throw std::invalid_argument("unknown boundary kind '" + name +
                              "' (expected source, absorbing or neumann)");
}

void BcConfig::validate() const {
  const auto sources =
      std::count(kinds.begin(), kinds.end(), BoundaryKind::source_then_absorbing);
  if (sources > 1) throw std::invalid_argument("at most one side may carry the source");
}

BcConfig BcConfig::all_neumann() {
  BcConfig bc;
  bc.kinds.fill(BoundaryKind::neumann_zero);
  return bc;
}

void SourceSpec::validate() const {
  if (!(omega > 0.0)) throw std::invalid_argument("source omega must be positive");
  if (!(t_on >= 0.0)) throw std::invalid_argument("source t_on must be >= 0");
}

SideConditions forward_conditions(const BcConfig& bc, const SourceSpec& src, double t) {
  SideConditions sides{};
  for (Side s : kAllSides) {
    SideCondition& c = sides[static_cast<std::size_t>(s) - 1];
    switch (bc.at(s)) {
      case BoundaryKind::neumann_zero:
        break;
      case BoundaryKind::absorbing:
        c.absorbing = true;
        break;
      case BoundaryKind::source_then_absorbing:
        if (src.active(t)) {
          c.flux = src.flux(t);
        } else {
          c.absorbing = true;
        }
        break;
    }
  }
  return sides;
}

void check_cfl(const Grid2D& grid, std::span<const double> eps) {
  const double eps_min = *std::min_element(eps.begin(), eps.end());
  if (!(eps_min > 0.0)) throw NumericalError("permittivity must be positive");
  const double limit = Grid2D::cfl_limit(grid.h, eps_min);
  if (grid.dt > limit * (1.0 + 1e-12)) {
    throw NumericalError("CFL violation: dt = " + std::to_string(grid.dt) +
                         " exceeds h*sqrt(min eps)/sqrt(2) = " + std::to_string(limit));
  }
}

SpaceTimeField propagate(const WaveProblem& p) {
  const Grid2D& g = p.grid;
  check_cfl(g, p.eps);
  const WaveStencil stencil(g, p.eps, p.sigma);
  SpaceTimeField field(g, p.role);
  const int nt = g.nt;
  auto level = [&](int m) { return field.snapshot(p.reverse_time ? nt - m : m); };

  std::vector<double> forcing;
  auto forcing_at = [&](int m) -> std::span<const double> {
    if (!p.forcing) return {};
    forcing.assign(g.node_count(), 0.0);
    p.forcing(m, g.t(m), forcing);
    return forcing;
  };

  if (!p.f0.empty()) std::copy(p.f0.begin(), p.f0.end(), level(0).begin());

  SideConditions sides{};
  if (p.boundary) p.boundary(0, sides);
  if (p.start_from_rest) {
    if (!p.f0.empty() || !p.f1.empty()) {
      throw std::invalid_argument("a start from rest takes no initial data");
    }
    const std::vector<double> zero(g.node_count(), 0.0);
    stencil.step(zero, zero, sides, forcing_at(0), level(1));
  } else {
    stencil.start(p.f0, p.f1, sides, forcing_at(0), level(1));
  }

  auto check_finite = [&](int m) {
    double sum = 0.0;
    for (double v : level(m)) sum += v;
    if (!std::isfinite(sum)) {
      throw NumericalError("non-finite field value at step " + std::to_string(m));
    }
  };
  check_finite(1);

  for (int m = 1; m < nt; ++m) {
    sides = SideConditions{};
    if (p.boundary) p.boundary(m, sides);
    stencil.step(level(m - 1), level(m), sides, forcing_at(m), level(m + 1));
    check_finite(m + 1);
  }
  return field;
}

SpaceTimeField solve_forward(const Grid2D& grid, const CoefficientField& eps,
                             const CoefficientField& sigma, const SourceSpec& src,
                             const BcConfig& bc) {
  if (!(eps.grid == grid) || !(sigma.grid == grid)) {
    throw std::invalid_argument("coefficients live on a different grid");
  }
  src.validate();
  bc.validate();
  const std::size_t m = grid.node_count();
  if ((!src.f0.empty() && src.f0.size() != m) || (!src.f1.empty() && src.f1.size() != m)) {
    throw std::invalid_argument("initial data size does not match grid");
  }
  WaveProblem p;
  p.grid = grid;
  p.eps = eps.values;
  p.sigma = sigma.values;
  p.boundary = [&](int n, SideConditions& sides) {
    sides = forward_conditions(bc, src, grid.t(n));
  };
  p.forcing = src.forcing;
  p.f0 = src.f0;
  p.f1 = src.f1;
  return propagate(p);
}

double discrete_energy(const SpaceTimeField& field, const CoefficientField& eps, int n) {
  const Grid2D& g = field.grid();
  if (n < 1 || n > g.nt) throw std::out_of_range("energy level must be in [1, nt]");
  const auto cur = field.snapshot(n);
  const auto old = field.snapshot(n - 1);
  double kinetic = 0.0;
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const double v = (cur[k] - old[k]) / g.dt;
      kinetic += g.area_weight(i, j) * eps.values[k] * v * v;
    }
  }
  return kinetic + gradient_form(g, cur, old);
}

void dump_snapshots(const SpaceTimeField& field, const std::filesystem::path& dir,
                    const std::string& prefix, int every) {
  if (every <= 0) return;
  const std::string name = prefix.empty() ? "field" : prefix.substr(0, 1);
  for (int n = 0; n <= field.grid().nt; n += every) {
    write_vtk(dir / (prefix + std::to_string(n) + ".vtk"), field.grid(),
              field.snapshot(n), name);
  }
}

}  // namespace cipwave
