#pragma once

#include <cstddef>
#include <vector>

#include "cipwave/fields.hpp"
#include "cipwave/forward_solver.hpp"
#include "cipwave/objective.hpp"

namespace cipwave {

struct Gradients {
  CoefficientField g_eps;
  CoefficientField g_sigma;
};

/// How the time integral of d_t lambda * d_t E in the permittivity gradient
/// is discretised.
enum class TimeDerivativeRule {
  /// Centred differences on the stored levels (one-sided at 0 and T) and
  /// trapezoid quadrature.
  centered,
  /// Forward differences paired on each step interval, midpoint quadrature.
  /// This is the summation-by-parts form of the leapfrog second difference.
  staggered,
};

struct GradientOptions {
  TimeDerivativeRule rule = TimeDerivativeRule::centered;
};

/// Nodal gradient densities
///   g_eps   = gamma_eps (eps - eps_prior) - lambda(0) f1 - int d_t lambda d_t E dt
///   g_sigma = gamma_sigma (sigma - sigma_prior) - f0 lambda(0) - int E d_t lambda dt
/// (no divergence terms for the scalar field), zeroed on frame nodes.
Gradients assemble_gradients(const SpaceTimeField& E, const SpaceTimeField& lambda,
                             const CoefficientField& eps, const CoefficientField& sigma,
                             const RegularizationParams& reg, double gamma_eps,
                             double gamma_sigma, const RegionMask& mask,
                             const SourceSpec& source = {},
                             GradientOptions options = {});

/// Tikhonov value at (eps, sigma): one forward solve.
struct ObjectiveContext {
  ForwardModel model;
  BoundaryTrace obs;
  RegularizationParams reg;
  double gamma_eps = 0.0;
  double gamma_sigma = 0.0;
  AdmissibleSet admissible;
  RegionMask mask;
  bool include_misfit = true;

  [[nodiscard]] double evaluate(const CoefficientField& eps,
                                const CoefficientField& sigma) const;
};

/// Forward solve, residual, adjoint solve and gradient assembly in one go.
struct GradientEvaluation {
  SpaceTimeField E;
  SpaceTimeField lambda;
  BoundaryTrace sim;
  BoundaryTrace residual;
  double F = 0.0;
  Gradients gradients;
};

GradientEvaluation evaluate_gradient(const ObjectiveContext& ctx,
                                     const CoefficientField& eps,
                                     const CoefficientField& sigma,
                                     GradientOptions options = {});

/// Same as evaluate_gradient for an already computed forward solution.
GradientEvaluation evaluate_gradient(const ObjectiveContext& ctx, SpaceTimeField E,
                                     const CoefficientField& eps,
                                     const CoefficientField& sigma,
                                     GradientOptions options = {});

struct OracleSample {
  std::size_t node = 0;
  Role which = Role::epsilon;
  double value = 0.0;
};

/// Central difference (F(c + h e_k) - F(c - h e_k)) / (2 h w_k) of the
/// projected objective for each sampled node k, with w_k the nodal area
/// weight so that the result is a gradient density. Probes that leave the
/// admissible box at an inner node throw std::domain_error.
std::vector<OracleSample> fd_gradient_oracle(const ObjectiveContext& ctx,
                                             const CoefficientField& eps,
                                             const CoefficientField& sigma,
                                             const std::vector<std::size_t>& nodes,
                                             Role which, double h_fd);

struct GradCheckRow {
  double x = 0.0;
  double y = 0.0;
  Role which = Role::epsilon;
  double adjoint = 0.0;
  double fd = 0.0;
  double rel_err = 0.0;
  bool qualifies = false;  // |fd| >= threshold * max |fd|
  bool frame = false;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  double tolerance = 5e-2;
  bool passed = true;
  double median_rel_err = 0.0;  // over qualifying rows
};

/// Compares adjoint gradients with the oracle at the given nodes for both
/// coefficients. rel_err = |adj - fd| / max(|fd|, 1e-12), 0 on frame nodes.
/// The qualifying threshold is taken per coefficient.
GradCheckReport grad_check(const ObjectiveContext& ctx, const CoefficientField& eps,
                           const CoefficientField& sigma,
                           const std::vector<std::size_t>& nodes, double h_fd,
                           double tolerance = 5e-2, double threshold = 1e-3,
                           GradientOptions options = {}, double adjoint_sign = 1.0);

}  // namespace cipwave
