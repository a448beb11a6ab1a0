#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cipwave/fields.hpp"
#include "cipwave/forward_solver.hpp"
#include "cipwave/gradient.hpp"
#include "cipwave/objective.hpp"

namespace cipwave {

/// Termination thresholds of the conjugate gradient loop. The loop stops as
/// soon as any one of them fires.
struct StoppingTolerances {
  double eta1_eps = 1e-8;    // ||eps^{m+1} - eps^m||
  double eta1_sigma = 1e-8;  // ||sigma^{m+1} - sigma^m||
  double eta2_eps = 1e-8;    // ||g_eps^m||
  double eta2_sigma = 1e-8;  // ||g_sigma^m||
  int max_iterations = 100;
};

struct ConvergenceRow;

struct CgOptions {
  StoppingTolerances tol;
  double alpha_max = 1.0;
  double alpha0_eps = 1.0;
  double alpha0_sigma = 1.0;
  double beta_max = 10.0;
  int max_backtracks = 10;
  GradientOptions gradient;
  std::function<void(const ConvergenceRow&)> on_iteration;  // called per logged row
};

/// Everything an inversion needs besides the starting coefficients.
struct InversionProblem {
  ForwardModel model;
  BoundaryTrace obs;
  RegularizationParams reg;
  AdmissibleSet admissible;
  RegionMask mask;
  std::optional<CoefficientField> eps_true;
  std::optional<CoefficientField> sigma_true;
};

/// One row per completed iteration m, describing the iterate the iteration
/// started from and the step it took.
struct ConvergenceRow {
  int m = 0;
  double F = 0.0;
  std::optional<ErrorMetrics> metrics;
  double g_eps_norm = 0.0;
  double g_sigma_norm = 0.0;
  double lambda_norm = 0.0;
  double gamma_eps = 0.0;
  double gamma_sigma = 0.0;
  double alpha_eps = 0.0;  // step actually taken, after backtracking
  double alpha_sigma = 0.0;
  double beta_eps = 0.0;
  double beta_sigma = 0.0;
  bool restart_eps = false;
  bool restart_sigma = false;
  int backtracks = 0;
};

using ConvergenceLog = std::vector<ConvergenceRow>;

inline constexpr const char* kConvergenceHeader =
    "m,F,e_eps_l2,e_eps_sup,e_sigma_l2,e_sigma_sup,e_E_l2,e_E_sup,g_eps_norm,"
    "g_sigma_norm,lambda_norm,gamma_eps,gamma_sigma,alpha_eps,alpha_sigma";

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceLog& log);

/// Iterate of the conjugate gradient method together with the forward and
/// adjoint solutions belonging to it.
struct CgState {
  int m = 0;
  CoefficientField eps;
  CoefficientField sigma;
  GradientEvaluation eval;
  CoefficientField d_eps;
  CoefficientField d_sigma;
  double alpha_eps = 0.0;
  double alpha_sigma = 0.0;
  double gamma_eps = 0.0;
  double gamma_sigma = 0.0;
  double g_eps_norm = 0.0;
  double g_sigma_norm = 0.0;
  double beta_eps = 0.0;
  double beta_sigma = 0.0;
  bool restart_eps = false;
  bool restart_sigma = false;
};

/// Fletcher-Reeves ratio ||g^m||^2 / ||g^{m-1}||^2, 0 when the previous norm
/// vanishes.
double fletcher_reeves_beta(double g_norm, double g_prev_norm);

/// -(g, d) / (gamma (d, d)) before clamping.
double step_size(double g_dot_d, double d_dot_d, double gamma);

double clamp_step(double alpha, double alpha_max);

/// Evaluates the starting point: forward and adjoint solves, gradients,
/// d^0 = -g^0, alpha^0 from the options, gamma^0 from the parameters.
CgState initial_state(const InversionProblem& problem, const CoefficientField& eps0,
                      const CoefficientField& sigma0, const CgOptions& options);

/// Fills the log row describing `state` (before its update is applied).
ConvergenceRow describe(const CgState& state, const InversionProblem& problem);

struct StepOutcome {
  CgState next;
  int backtracks = 0;
  double alpha_eps_taken = 0.0;
  double alpha_sigma_taken = 0.0;
  double update_eps_norm = 0.0;
  double update_sigma_norm = 0.0;
};

/// Projected update eps^{m+1} = P(eps^m + alpha d^m) (likewise sigma), with
/// alpha halved while the objective would increase; then evaluates the new
/// iterate, its Fletcher-Reeves direction, the next step size
/// -(g^m, d^m) / (gamma^m (d^m, d^m)) clamped to alpha_max, and gamma^{m+1}.
StepOutcome cg_step(const CgState& state, const InversionProblem& problem,
                    const CgOptions& options);

enum class StopReason { iteration_cap, update_small, gradient_small };

std::string to_string(StopReason reason);

struct CgResult {
  CoefficientField eps;
  CoefficientField sigma;
  ConvergenceLog log;
  StopReason reason = StopReason::iteration_cap;
  int iterations = 0;
  double final_g_eps_norm = 0.0;  // gradient at the returned iterate
  double final_g_sigma_norm = 0.0;
  double final_F = 0.0;
};

CgResult run_cga(const InversionProblem& problem, const CoefficientField& eps0,
                 const CoefficientField& sigma0, const CgOptions& options);

enum class IndicatorMode { absolute, deviation };

std::string to_string(IndicatorMode mode);
IndicatorMode indicator_mode_from_string(const std::string& name);

/// Cells (nx by ny, row-major) whose indicator, the cell average of |h v| or
/// |h (v - background)|, reaches beta times its maximum for eps or sigma.
struct RefinementFlags {
  std::vector<char> flagged;
  std::size_t count = 0;
  double max_eps = 0.0;
  double max_sigma = 0.0;
};

RefinementFlags refinement_flags(const CoefficientField& eps, const CoefficientField& sigma,
                                 double beta_eps, double beta_sigma, IndicatorMode mode,
                                 const AdmissibleSet& admissible);

struct AcgaOptions {
  int max_refinements = 1;  // N
  double beta_eps = 0.8;
  double beta_sigma = 0.8;
  IndicatorMode mode = IndicatorMode::deviation;
  double theta1_eps = 0.0;
  double theta1_sigma = 0.0;
  double theta2_eps = 0.0;
  double theta2_sigma = 0.0;
};

struct LevelResult {
  Grid2D grid;
  CgResult cga;
  RefinementFlags flags;
  InversionProblem problem;
  std::optional<ErrorMetrics> final_metrics;
};

struct AcgaResult {
  std::vector<LevelResult> levels;
  std::string stop_reason;
};

inline constexpr const char* kLevelsHeader =
    "level,nno,g_eps_norm_per_node,g_sigma_norm_per_node,max_eps,max_sigma,M_k";

/// Conjugate gradients on a sequence of factor-2 refined grids. Coefficients,
/// truth and observations are carried to the next grid by
/// transfer_to_refined; the frame keeps its physical width. Each refined
/// level starts from the carried reconstruction and uses it as the prior.
/// Stops when refinement is capped, no cell is flagged, or any theta test
/// fires (theta2 compares gradient norms per node).
AcgaResult run_acga(const InversionProblem& problem, const CoefficientField& eps0,
                    const CoefficientField& sigma0, const CgOptions& cg,
                    const AcgaOptions& options);

void write_levels_csv(const std::filesystem::path& path, const AcgaResult& result);

/// Moves an inversion problem to the factor-2 refinement of its grid.
InversionProblem refine_problem(const InversionProblem& problem);

}  // namespace cipwave
