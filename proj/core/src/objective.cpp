#include "cipwave/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cipwave/wave_stencil.hpp"

namespace cipwave {

double RegularizationParams::decayed(double gamma0, double p, int m) {
  return gamma0 / std::pow(static_cast<double>(m + 1), p);
}

void RegularizationParams::validate() const {
  if (gamma_eps0 < 0.0 || gamma_sigma0 < 0.0) {
    throw std::invalid_argument("regularization weights must be >= 0");
  }
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("decay exponent p must lie in (0, 1]");
}

double boundary_dot(const BoundaryTrace& a, const BoundaryTrace& b) {
  if (!a.compatible_with(b)) {
    throw std::invalid_argument("traces differ in grid, sides or time levels");
  }
  const Grid2D& g = a.grid();
  double total = 0.0;
  for (int n = 0; n <= g.nt; ++n) {
    double level = 0.0;
    for (Side s : a.sides().list()) {
      const auto va = a.side_values(n, s);
      const auto vb = b.side_values(n, s);
      const std::size_t last = va.size() - 1;
      double side = 0.5 * (va[0] * vb[0] + va[last] * vb[last]);
      for (std::size_t k = 1; k < last; ++k) side += va[k] * vb[k];
      level += g.h * side;
    }
    total += g.time_weight(n) * level;
  }
  return total;
}

double space_time_dot(const SpaceTimeField& u, const SpaceTimeField& v) {
  if (!(u.grid() == v.grid())) throw std::invalid_argument("fields live on different grids");
  const Grid2D& g = u.grid();
  double total = 0.0;
  for (int n = 0; n <= g.nt; ++n) {
    total += g.time_weight(n) * area_dot(g, u.snapshot(n), v.snapshot(n));
  }
  return total;
}

namespace {

double prior_term(const CoefficientField& f, const CoefficientField& prior) {
  if (prior.values.empty()) {
    throw std::invalid_argument("regularization prior for " + to_string(f.role) +
                                " is not set");
  }
  if (!(prior.grid == f.grid)) {
    throw std::invalid_argument("prior lives on a different grid");
  }
  std::vector<double> d(f.values.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = f.values[k] - prior.values[k];
  return area_dot(f.grid, d, d);
}

}  // namespace

double tikhonov(const BoundaryTrace& sim, const BoundaryTrace& obs,
                const CoefficientField& eps, const CoefficientField& sigma,
                const RegularizationParams& reg, double gamma_eps, double gamma_sigma) {
  const BoundaryTrace r = trace_difference(sim, obs);
  double value = 0.5 * boundary_dot(r, r);
  if (gamma_eps != 0.0) value += 0.5 * gamma_eps * prior_term(eps, reg.eps_prior);
  if (gamma_sigma != 0.0) value += 0.5 * gamma_sigma * prior_term(sigma, reg.sigma_prior);
  return value;
}

double lagrangian(const SpaceTimeField& E, const SpaceTimeField& lambda,
                  const CoefficientField& eps, const CoefficientField& sigma,
                  const RegularizationParams& reg, double gamma_eps,
                  double gamma_sigma, const BoundaryTrace& obs,
                  const ForwardModel& model) {
  const Grid2D& g = E.grid();
  if (!(lambda.grid() == g) || !(model.grid == g)) {
    throw std::invalid_argument("state, adjoint and model grids differ");
  }
  const double F =
      tikhonov(extract_trace(E, obs.sides()), obs, eps, sigma, reg, gamma_eps, gamma_sigma);

  const WaveStencil stencil(g, eps.values, sigma.values);
  const SourceSpec& src = model.source;
  std::vector<double> defect(g.node_count());
  std::vector<double> forcing;
  auto forcing_at = [&](int n) -> std::span<const double> {
    if (!src.forcing) return {};
    forcing.assign(g.node_count(), 0.0);
    src.forcing(n, g.t(n), forcing);
    return forcing;
  };

  double coupling = 0.0;
  stencil.start_defect(src.f0, src.f1, E.snapshot(1),
                       forward_conditions(model.bc, src, g.t(0)), forcing_at(0), defect);
  coupling += g.dt * area_dot(g, lambda.snapshot(0), defect);
  for (int n = 1; n < g.nt; ++n) {
    stencil.step_defect(E.snapshot(n - 1), E.snapshot(n), E.snapshot(n + 1),
                        forward_conditions(model.bc, src, g.t(n)), forcing_at(n), defect);
    coupling += g.dt * area_dot(g, lambda.snapshot(n), defect);
  }
  return F + coupling;
}

DecompositionCheck decomposition_identity_check(
    const CoefficientField& eps, const CoefficientField& sigma,
    const CoefficientField& eps_n, const CoefficientField& sigma_n,
    const BoundaryTrace& obs, const RegularizationParams& reg, double gamma_eps,
    double gamma_sigma, const ForwardModel& model) {
  const BoundaryTrace sim = extract_trace(model.solve(eps, sigma), obs.sides());
  const BoundaryTrace sim_n = extract_trace(model.solve(eps_n, sigma_n), obs.sides());
  const BoundaryTrace dE = trace_difference(sim, sim_n);
  const BoundaryTrace misfit = trace_difference(sim, obs);

  DecompositionCheck out;
  out.lhs = tikhonov(sim, obs, eps, sigma, reg, gamma_eps, gamma_sigma);
  double rhs = tikhonov(sim_n, obs, eps_n, sigma_n, reg, gamma_eps, gamma_sigma) -
               0.5 * boundary_dot(dE, dE) + boundary_dot(misfit, dE);

  const Grid2D& g = eps.grid;
  auto reg_terms = [&](const CoefficientField& a, const CoefficientField& b,
                       const CoefficientField& prior, double gamma) {
    if (gamma == 0.0) return 0.0;
    std::vector<double> d(a.values.size());
    std::vector<double> dev(a.values.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      d[k] = a.values[k] - b.values[k];
      dev[k] = a.values[k] - prior.values[k];
    }
    return -0.5 * gamma * area_dot(g, d, d) + gamma * area_dot(g, dev, d);
  };
  rhs += reg_terms(eps, eps_n, reg.eps_prior, gamma_eps);
  rhs += reg_terms(sigma, sigma_n, reg.sigma_prior, gamma_sigma);
  out.rhs = rhs;
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

double area_norm(const CoefficientField& f) {
  return std::sqrt(area_dot(f.grid, f.values, f.values));
}

double relative_l2_error(const CoefficientField& approx, const CoefficientField& exact) {
  if (!(approx.grid == exact.grid)) throw std::invalid_argument("fields on different grids");
  std::vector<double> d(approx.values.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = approx.values[k] - exact.values[k];
  const double denom = area_norm(exact);
  if (denom == 0.0) throw std::domain_error("relative error with zero reference norm");
  return std::sqrt(area_dot(exact.grid, d, d)) / denom;
}

double relative_sup_error(const CoefficientField& approx, const CoefficientField& exact) {
  if (!(approx.grid == exact.grid)) throw std::invalid_argument("fields on different grids");
  double num = 0.0;
  double denom = 0.0;
  for (std::size_t k = 0; k < approx.values.size(); ++k) {
    num = std::max(num, std::abs(approx.values[k] - exact.values[k]));
    denom = std::max(denom, std::abs(exact.values[k]));
  }
  if (denom == 0.0) throw std::domain_error("relative error with zero reference norm");
  return num / denom;
}

ErrorMetrics error_metrics(const CoefficientField& eps_m,
                           const CoefficientField& sigma_m,
                           const CoefficientField& eps_true,
                           const CoefficientField& sigma_true,
                           const BoundaryTrace& sim_m, const BoundaryTrace& obs) {
  ErrorMetrics out;
  out.e_eps_l2 = relative_l2_error(eps_m, eps_true);
  out.e_eps_sup = relative_sup_error(eps_m, eps_true);
  out.e_sigma_l2 = relative_l2_error(sigma_m, sigma_true);
  out.e_sigma_sup = relative_sup_error(sigma_m, sigma_true);

  const BoundaryTrace r = trace_difference(sim_m, obs);
  const double sim_l2 = boundary_dot(sim_m, sim_m);
  double sim_sup = 0.0;
  double r_sup = 0.0;
  for (double v : sim_m.data()) sim_sup = std::max(sim_sup, std::abs(v));
  for (double v : r.data()) r_sup = std::max(r_sup, std::abs(v));
  if (sim_l2 == 0.0 || sim_sup == 0.0) {
    throw std::domain_error("e_E undefined: simulated trace is identically zero");
  }
  out.e_E_l2 = std::sqrt(boundary_dot(r, r) / sim_l2);
  out.e_E_sup = r_sup / sim_sup;
  return out;
}

}  // namespace cipwave
