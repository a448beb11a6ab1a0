#include "cipwave/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "cipwave/adjoint_solver.hpp"

namespace cipwave {

namespace {

void require_same_grid(const Grid2D& g, const Grid2D& other, const char* what) {
  if (!(g == other)) throw std::invalid_argument(std::string(what) + " lives on a different grid");
}

}  // namespace

Gradients assemble_gradients(const SpaceTimeField& E, const SpaceTimeField& lambda,
                             const CoefficientField& eps, const CoefficientField& sigma,
                             const RegularizationParams& reg, double gamma_eps,
                             double gamma_sigma, const RegionMask& mask,
                             const SourceSpec& source, GradientOptions options) {
  const Grid2D& g = E.grid();
  require_same_grid(g, lambda.grid(), "adjoint");
  require_same_grid(g, eps.grid, "permittivity");
  require_same_grid(g, sigma.grid, "conductivity");
  if (mask.size() != g.node_count()) throw std::invalid_argument("region mask does not match grid");

  const std::size_t m = g.node_count();
  Gradients out{CoefficientField(g, Role::epsilon), CoefficientField(g, Role::sigma)};
  auto& ge = out.g_eps.values;
  auto& gs = out.g_sigma.values;

  // Time integrals, accumulated level by level for cache-friendly access.
  if (options.rule == TimeDerivativeRule::centered) {
    for (int n = 0; n <= g.nt; ++n) {
      const double w = g.time_weight(n);
      const int lo = std::max(n - 1, 0);
      const int hi = std::min(n + 1, g.nt);
      const double inv = 1.0 / ((hi - lo) * g.dt);
      const auto En = E.snapshot(n);
      const auto Elo = E.snapshot(lo);
      const auto Ehi = E.snapshot(hi);
      const auto llo = lambda.snapshot(lo);
      const auto lhi = lambda.snapshot(hi);
      for (std::size_t k = 0; k < m; ++k) {
        const double dl = (lhi[k] - llo[k]) * inv;
        ge[k] -= w * dl * (Ehi[k] - Elo[k]) * inv;
        gs[k] -= w * En[k] * dl;
      }
    }
  } else {
    for (int n = 0; n < g.nt; ++n) {
      const auto E0 = E.snapshot(n);
      const auto E1 = E.snapshot(n + 1);
      const auto l0 = lambda.snapshot(n);
      const auto l1 = lambda.snapshot(n + 1);
      for (std::size_t k = 0; k < m; ++k) {
        ge[k] -= (l1[k] - l0[k]) * (E1[k] - E0[k]) / g.dt;
      }
    }
    for (int n = 0; n <= g.nt; ++n) {
      const double w = g.time_weight(n);
      const int lo = std::max(n - 1, 0);
      const int hi = std::min(n + 1, g.nt);
      const double inv = 1.0 / ((hi - lo) * g.dt);
      const auto En = E.snapshot(n);
      const auto llo = lambda.snapshot(lo);
      const auto lhi = lambda.snapshot(hi);
      for (std::size_t k = 0; k < m; ++k) gs[k] -= w * En[k] * (lhi[k] - llo[k]) * inv;
    }
  }

  const auto l0 = lambda.snapshot(0);
  if (!source.f1.empty()) {
    for (std::size_t k = 0; k < m; ++k) ge[k] -= l0[k] * source.f1[k];
  }
  if (!source.f0.empty()) {
    for (std::size_t k = 0; k < m; ++k) gs[k] -= source.f0[k] * l0[k];
  }
  if (gamma_eps != 0.0) {
    require_same_grid(g, reg.eps_prior.grid, "permittivity prior");
    for (std::size_t k = 0; k < m; ++k) {
      ge[k] += gamma_eps * (eps.values[k] - reg.eps_prior.values[k]);
    }
  }
  if (gamma_sigma != 0.0) {
    require_same_grid(g, reg.sigma_prior.grid, "conductivity prior");
    for (std::size_t k = 0; k < m; ++k) {
      gs[k] += gamma_sigma * (sigma.values[k] - reg.sigma_prior.values[k]);
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (mask.is_frame(k)) {
      ge[k] = 0.0;
      gs[k] = 0.0;
    }
  }
  return out;
}

double ObjectiveContext::evaluate(const CoefficientField& eps,
                                  const CoefficientField& sigma) const {
  if (!include_misfit) {
    return tikhonov(obs, obs, eps, sigma, reg, gamma_eps, gamma_sigma);
  }
  const BoundaryTrace sim = extract_trace(model.solve(eps, sigma), obs.sides());
  return tikhonov(sim, obs, eps, sigma, reg, gamma_eps, gamma_sigma);
}

GradientEvaluation evaluate_gradient(const ObjectiveContext& ctx,
                                     const CoefficientField& eps,
                                     const CoefficientField& sigma,
                                     GradientOptions options) {
  return evaluate_gradient(ctx, ctx.model.solve(eps, sigma), eps, sigma, options);
}

GradientEvaluation evaluate_gradient(const ObjectiveContext& ctx, SpaceTimeField E,
                                     const CoefficientField& eps,
                                     const CoefficientField& sigma,
                                     GradientOptions options) {
  GradientEvaluation ev;
  ev.E = std::move(E);
  ev.sim = extract_trace(ev.E, ctx.obs.sides());
  if (ctx.include_misfit) {
    ev.residual = trace_difference(ev.sim, ctx.obs);
  } else {
    ev.residual = BoundaryTrace(ctx.model.grid, ctx.obs.sides());
  }
  ev.F = tikhonov(ctx.include_misfit ? ev.sim : ctx.obs, ctx.obs, eps, sigma, ctx.reg,
                  ctx.gamma_eps, ctx.gamma_sigma);
  ev.lambda = solve_adjoint(ctx.model.grid, eps, sigma, ev.residual, ctx.model.bc,
                            ctx.model.source);
  ev.gradients = assemble_gradients(ev.E, ev.lambda, eps, sigma, ctx.reg, ctx.gamma_eps,
                                    ctx.gamma_sigma, ctx.mask, ctx.model.source, options);
  return ev;
}

std::vector<OracleSample> fd_gradient_oracle(const ObjectiveContext& ctx,
                                             const CoefficientField& eps,
                                             const CoefficientField& sigma,
                                             const std::vector<std::size_t>& nodes,
                                             Role which, double h_fd) {
  if (!(h_fd > 0.0)) throw std::invalid_argument("h_fd must be positive");
  const Grid2D& g = eps.grid;
  const CoefficientField& base = which == Role::epsilon ? eps : sigma;
  const double lo = ctx.admissible.lower(which);
  const double hi = ctx.admissible.upper(which);

  std::vector<OracleSample> out;
  out.reserve(nodes.size());
  for (std::size_t node : nodes) {
    if (node >= g.node_count()) throw std::out_of_range("sample node outside grid");
    const double v = base.values[node];
    if (!ctx.mask.is_frame(node) && (v - h_fd < lo || v + h_fd > hi)) {
      throw std::domain_error("finite-difference probe at node " + std::to_string(node) +
                              " leaves the admissible set; use a smaller h_fd");
    }
    auto probe = [&](double delta) {
      CoefficientField c = base;
      c.values[node] += delta;
      c = project(c, ctx.admissible, ctx.mask);
      return which == Role::epsilon ? ctx.evaluate(c, sigma) : ctx.evaluate(eps, c);
    };
    const int i = static_cast<int>(node % static_cast<std::size_t>(g.nx + 1));
    const int j = static_cast<int>(node / static_cast<std::size_t>(g.nx + 1));
    const double w = g.area_weight(i, j);
    const double value = (probe(h_fd) - probe(-h_fd)) / (2.0 * h_fd * w);
    out.push_back({node, which, value});
  }
  return out;
}

GradCheckReport grad_check(const ObjectiveContext& ctx, const CoefficientField& eps,
                           const CoefficientField& sigma,
                           const std::vector<std::size_t>& nodes, double h_fd,
                           double tolerance, double threshold, GradientOptions options,
                           double adjoint_sign) {
  const Grid2D& g = eps.grid;
  const GradientEvaluation ev = evaluate_gradient(ctx, eps, sigma, options);

  GradCheckReport report;
  report.tolerance = tolerance;
  std::vector<double> qualifying_errors;
  for (Role which : {Role::epsilon, Role::sigma}) {
    const auto fd = fd_gradient_oracle(ctx, eps, sigma, nodes, which, h_fd);
    const CoefficientField& adj =
        which == Role::epsilon ? ev.gradients.g_eps : ev.gradients.g_sigma;
    double fd_max = 0.0;
    for (const auto& s : fd) fd_max = std::max(fd_max, std::abs(s.value));
    for (const auto& s : fd) {
      GradCheckRow row;
      const int i = static_cast<int>(s.node % static_cast<std::size_t>(g.nx + 1));
      const int j = static_cast<int>(s.node / static_cast<std::size_t>(g.nx + 1));
      row.x = g.x(i);
      row.y = g.y(j);
      row.which = which;
      row.adjoint = adjoint_sign * adj.values[s.node];
      row.fd = s.value;
      row.frame = ctx.mask.is_frame(s.node);
      row.rel_err = row.frame ? 0.0
                              : std::abs(row.adjoint - row.fd) /
                                    std::max(std::abs(row.fd), 1e-12);
      row.qualifies = !row.frame && fd_max > 0.0 && std::abs(row.fd) >= threshold * fd_max;
      if (row.qualifies) {
        qualifying_errors.push_back(row.rel_err);
        if (row.rel_err > tolerance) report.passed = false;
      }
      report.rows.push_back(row);
    }
  }
  if (!qualifying_errors.empty()) {
    std::sort(qualifying_errors.begin(), qualifying_errors.end());
    const std::size_t n = qualifying_errors.size();
    report.median_rel_err = n % 2 == 1 ? qualifying_errors[n / 2]
                                       : 0.5 * (qualifying_errors[n / 2 - 1] +
                                                qualifying_errors[n / 2]);
  }
  return report;
}

}  // namespace cipwave
