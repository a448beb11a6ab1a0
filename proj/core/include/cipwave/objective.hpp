#pragma once

#include "cipwave/fields.hpp"
#include "cipwave/forward_solver.hpp"

namespace cipwave {

/// Initial regularization weights, their decay exponent and the priors.
struct RegularizationParams {
  double gamma_eps0 = 0.01;
  double gamma_sigma0 = 0.01;
  double p = 0.5;
  CoefficientField eps_prior;
  CoefficientField sigma_prior;

  /// gamma0 / (m + 1)^p
  [[nodiscard]] static double decayed(double gamma0, double p, int m);
  void validate() const;
};

/// Trapezoid quadrature over the observed space-time boundary: trapezoid in
/// time, trapezoid along each side (half weight at side endpoints).
double boundary_dot(const BoundaryTrace& a, const BoundaryTrace& b);

/// Trapezoid quadrature over the space-time cylinder.
double space_time_dot(const SpaceTimeField& u, const SpaceTimeField& v);

/// 1/2 ||sim - obs||^2 + gamma_eps/2 ||eps - eps_prior||^2
///   + gamma_sigma/2 ||sigma - sigma_prior||^2.
double tikhonov(const BoundaryTrace& sim, const BoundaryTrace& obs,
                const CoefficientField& eps, const CoefficientField& sigma,
                const RegularizationParams& reg, double gamma_eps, double gamma_sigma);

/// Tikhonov value plus sum_n dt (lambda^n, D^n) over n = 0..nt-1, where D^n
/// is the defect of the scheme's n-th update (the Taylor start for n = 0)
/// evaluated on E. Equals the Tikhonov value when E solves the scheme.
double lagrangian(const SpaceTimeField& E, const SpaceTimeField& lambda,
                  const CoefficientField& eps, const CoefficientField& sigma,
                  const RegularizationParams& reg, double gamma_eps,
                  double gamma_sigma, const BoundaryTrace& obs,
                  const ForwardModel& model);

/// Both sides of the splitting
///   F(a) = F(b) - 1/2 ||dE||^2 + <E(a) - obs, dE>
///          - gamma_eps/2 ||d eps||^2 + gamma_eps (eps - eps_prior, d eps)
///          - gamma_sigma/2 ||d sigma||^2 + gamma_sigma (sigma - sigma_prior, d sigma)
/// with a = (eps, sigma), b = (eps_n, sigma_n), dE = E(a) - E(b),
/// d eps = eps - eps_n, d sigma = sigma - sigma_n.
struct DecompositionCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

DecompositionCheck decomposition_identity_check(
    const CoefficientField& eps, const CoefficientField& sigma,
    const CoefficientField& eps_n, const CoefficientField& sigma_n,
    const BoundaryTrace& obs, const RegularizationParams& reg, double gamma_eps,
    double gamma_sigma, const ForwardModel& model);

struct ErrorMetrics {
  double e_eps_l2 = 0.0;
  double e_eps_sup = 0.0;
  double e_sigma_l2 = 0.0;
  double e_sigma_sup = 0.0;
  double e_E_l2 = 0.0;
  double e_E_sup = 0.0;
};

/// Relative L2 and sup errors of the coefficients against the truth and of
/// the simulated trace against the observations, the latter relative to the
/// simulated trace. Throws std::domain_error on a zero denominator.
ErrorMetrics error_metrics(const CoefficientField& eps_m,
                           const CoefficientField& sigma_m,
                           const CoefficientField& eps_true,
                           const CoefficientField& sigma_true,
                           const BoundaryTrace& sim_m, const BoundaryTrace& obs);

/// Relative L2 / sup error of one field.
double relative_l2_error(const CoefficientField& approx, const CoefficientField& exact);
double relative_sup_error(const CoefficientField& approx, const CoefficientField& exact);

double area_norm(const CoefficientField& f);

}  // namespace cipwave
