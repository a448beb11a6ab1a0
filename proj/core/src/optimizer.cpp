#include "cipwave/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

#include "cipwave/errors.hpp"
#include "cipwave/wave_stencil.hpp"

namespace cipwave {

namespace {

double dot(const CoefficientField& a, const CoefficientField& b) {
  return area_dot(a.grid, a.values, b.values);
}

ObjectiveContext make_context(const InversionProblem& problem, double gamma_eps,
                              double gamma_sigma) {
  ObjectiveContext ctx;
  ctx.model = problem.model;
  ctx.obs = problem.obs;
  ctx.reg = problem.reg;
  ctx.gamma_eps = gamma_eps;
  ctx.gamma_sigma = gamma_sigma;
  ctx.admissible = problem.admissible;
  ctx.mask = problem.mask;
  return ctx;
}

CoefficientField axpy(const CoefficientField& x, double a, const CoefficientField& d) {
  CoefficientField out = x;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += a * d.values[k];
  return out;
}

double difference_norm(const CoefficientField& a, const CoefficientField& b) {
  std::vector<double> d(a.values.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = a.values[k] - b.values[k];
  return std::sqrt(area_dot(a.grid, d, d));
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string(what) + " is not finite");
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double fletcher_reeves_beta(double g_norm, double g_prev_norm) {
  if (g_prev_norm == 0.0) return 0.0;
  return (g_norm * g_norm) / (g_prev_norm * g_prev_norm);
}

double step_size(double g_dot_d, double d_dot_d, double gamma) {
  if (d_dot_d == 0.0 || gamma == 0.0) return 0.0;
  return -g_dot_d / (gamma * d_dot_d);
}

double clamp_step(double alpha, double alpha_max) {
  if (std::isnan(alpha)) return 0.0;
  return std::clamp(alpha, -alpha_max, alpha_max);
}

CgState initial_state(const InversionProblem& problem, const CoefficientField& eps0,
                      const CoefficientField& sigma0, const CgOptions& options) {
  CgState s;
  s.m = 0;
  s.eps = project(eps0, problem.admissible, problem.mask);
  s.sigma = project(sigma0, problem.admissible, problem.mask);
  s.gamma_eps = RegularizationParams::decayed(problem.reg.gamma_eps0, problem.reg.p, 0);
  s.gamma_sigma = RegularizationParams::decayed(problem.reg.gamma_sigma0, problem.reg.p, 0);
  const ObjectiveContext ctx = make_context(problem, s.gamma_eps, s.gamma_sigma);
  s.eval = evaluate_gradient(ctx, s.eps, s.sigma, options.gradient);
  require_finite(s.eval.F, "objective at the initial guess");
  s.g_eps_norm = area_norm(s.eval.gradients.g_eps);
  s.g_sigma_norm = area_norm(s.eval.gradients.g_sigma);
  s.d_eps = axpy(CoefficientField(s.eps.grid, Role::epsilon), -1.0, s.eval.gradients.g_eps);
  s.d_sigma = axpy(CoefficientField(s.eps.grid, Role::sigma), -1.0, s.eval.gradients.g_sigma);
  s.alpha_eps = clamp_step(options.alpha0_eps, options.alpha_max);
  s.alpha_sigma = clamp_step(options.alpha0_sigma, options.alpha_max);
  return s;
}

ConvergenceRow describe(const CgState& state, const InversionProblem& problem) {
  ConvergenceRow row;
  row.m = state.m;
  row.F = state.eval.F;
  if (problem.eps_true && problem.sigma_true) {
    row.metrics = error_metrics(state.eps, state.sigma, *problem.eps_true,
                                *problem.sigma_true, state.eval.sim, problem.obs);
  }
  row.g_eps_norm = state.g_eps_norm;
  row.g_sigma_norm = state.g_sigma_norm;
  row.lambda_norm = std::sqrt(space_time_dot(state.eval.lambda, state.eval.lambda));
  row.gamma_eps = state.gamma_eps;
  row.gamma_sigma = state.gamma_sigma;
  row.alpha_eps = state.alpha_eps;
  row.alpha_sigma = state.alpha_sigma;
  row.beta_eps = state.beta_eps;
  row.beta_sigma = state.beta_sigma;
  row.restart_eps = state.restart_eps;
  row.restart_sigma = state.restart_sigma;
  return row;
}

StepOutcome cg_step(const CgState& state, const InversionProblem& problem,
                    const CgOptions& options) {
  StepOutcome out;
  double a_eps = state.alpha_eps;
  double a_sigma = state.alpha_sigma;
  CoefficientField eps_new;
  CoefficientField sigma_new;
  SpaceTimeField E_new;
  // Halve the step while the objective goes up; after max_backtracks halvings
  // the last trial is accepted as is.
  for (int bt = 0;; ++bt) {
    eps_new = project(axpy(state.eps, a_eps, state.d_eps), problem.admissible, problem.mask);
    sigma_new =
        project(axpy(state.sigma, a_sigma, state.d_sigma), problem.admissible, problem.mask);
    E_new = problem.model.solve(eps_new, sigma_new);
    const BoundaryTrace sim = extract_trace(E_new, problem.obs.sides());
    const double F_new = tikhonov(sim, problem.obs, eps_new, sigma_new, problem.reg,
                                  state.gamma_eps, state.gamma_sigma);
    if ((std::isfinite(F_new) && F_new <= state.eval.F) || bt >= options.max_backtracks) {
      require_finite(F_new, "objective after the update");
      out.backtracks = bt;
      break;
    }
    a_eps *= 0.5;
    a_sigma *= 0.5;
  }
  out.alpha_eps_taken = a_eps;
  out.alpha_sigma_taken = a_sigma;
  out.update_eps_norm = difference_norm(eps_new, state.eps);
  out.update_sigma_norm = difference_norm(sigma_new, state.sigma);

  const CoefficientField& g_eps = state.eval.gradients.g_eps;
  const CoefficientField& g_sigma = state.eval.gradients.g_sigma;

  CgState& n = out.next;
  n.m = state.m + 1;
  n.alpha_eps = clamp_step(
      step_size(dot(g_eps, state.d_eps), dot(state.d_eps, state.d_eps), state.gamma_eps),
      options.alpha_max);
  n.alpha_sigma = clamp_step(step_size(dot(g_sigma, state.d_sigma),
                                       dot(state.d_sigma, state.d_sigma), state.gamma_sigma),
                             options.alpha_max);
  n.gamma_eps = RegularizationParams::decayed(problem.reg.gamma_eps0, problem.reg.p, n.m);
  n.gamma_sigma = RegularizationParams::decayed(problem.reg.gamma_sigma0, problem.reg.p, n.m);
  n.eps = std::move(eps_new);
  n.sigma = std::move(sigma_new);

  const ObjectiveContext next_ctx = make_context(problem, n.gamma_eps, n.gamma_sigma);
  n.eval = evaluate_gradient(next_ctx, std::move(E_new), n.eps, n.sigma, options.gradient);
  n.g_eps_norm = area_norm(n.eval.gradients.g_eps);
  n.g_sigma_norm = area_norm(n.eval.gradients.g_sigma);

  auto direction = [&](double g_norm, double g_prev, const CoefficientField& g,
                       const CoefficientField& d_prev, double& beta, bool& restart) {
    beta = fletcher_reeves_beta(g_norm, g_prev);
    restart = g_prev == 0.0 || beta > options.beta_max;
    if (restart) beta = 0.0;
    CoefficientField d = axpy(CoefficientField(g.grid, g.role), -1.0, g);
    for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] += beta * d_prev.values[k];
    return d;
  };
  n.d_eps = direction(n.g_eps_norm, state.g_eps_norm, n.eval.gradients.g_eps, state.d_eps,
                      n.beta_eps, n.restart_eps);
  n.d_sigma = direction(n.g_sigma_norm, state.g_sigma_norm, n.eval.gradients.g_sigma,
                        state.d_sigma, n.beta_sigma, n.restart_sigma);
  return out;
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::iteration_cap: return "iteration_cap";
    case StopReason::update_small: return "update_small";
    case StopReason::gradient_small: return "gradient_small";
  }
  return "unknown";
}

CgResult run_cga(const InversionProblem& problem, const CoefficientField& eps0,
                 const CoefficientField& sigma0, const CgOptions& options) {
  if (options.tol.max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  if (!(options.alpha_max > 0.0)) throw std::invalid_argument("alpha_max must be positive");

  CgResult result;
  CgState state = initial_state(problem, eps0, sigma0, options);
  const StoppingTolerances& tol = options.tol;
  for (;;) {
    if (state.m >= tol.max_iterations) {
      result.reason = StopReason::iteration_cap;
      break;
    }
    if (state.g_eps_norm < tol.eta2_eps || state.g_sigma_norm < tol.eta2_sigma) {
      result.log.push_back(describe(state, problem));
      if (options.on_iteration) options.on_iteration(result.log.back());
      result.reason = StopReason::gradient_small;
      break;
    }
    StepOutcome step = cg_step(state, problem, options);
    ConvergenceRow row = describe(state, problem);
    row.alpha_eps = step.alpha_eps_taken;
    row.alpha_sigma = step.alpha_sigma_taken;
    row.backtracks = step.backtracks;
    result.log.push_back(row);
    if (options.on_iteration) options.on_iteration(row);
    state = std::move(step.next);
    if (step.update_eps_norm < tol.eta1_eps || step.update_sigma_norm < tol.eta1_sigma) {
      result.reason = StopReason::update_small;
      break;
    }
  }
  result.iterations = static_cast<int>(result.log.size());
  result.final_g_eps_norm = state.g_eps_norm;
  result.final_g_sigma_norm = state.g_sigma_norm;
  result.final_F = state.eval.F;
  result.eps = std::move(state.eps);
  result.sigma = std::move(state.sigma);
  return result;
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kConvergenceHeader << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : log) {
    const ErrorMetrics m = r.metrics.value_or(ErrorMetrics{nan, nan, nan, nan, nan, nan});
    out << r.m << ',' << fmt(r.F) << ',' << fmt(m.e_eps_l2) << ',' << fmt(m.e_eps_sup) << ','
        << fmt(m.e_sigma_l2) << ',' << fmt(m.e_sigma_sup) << ',' << fmt(m.e_E_l2) << ','
        << fmt(m.e_E_sup) << ',' << fmt(r.g_eps_norm) << ',' << fmt(r.g_sigma_norm) << ','
        << fmt(r.lambda_norm) << ',' << fmt(r.gamma_eps) << ',' << fmt(r.gamma_sigma) << ','
        << fmt(r.alpha_eps) << ',' << fmt(r.alpha_sigma) << '\n';
  }
}

std::string to_string(IndicatorMode mode) {
  return mode == IndicatorMode::absolute ? "absolute" : "deviation";
}

IndicatorMode indicator_mode_from_string(const std::string& name) {
  if (name == "absolute") return IndicatorMode::absolute;
  if (name == "deviation") return IndicatorMode::deviation;
  throw std::invalid_argument("unknown indicator mode '" + name +
                              "' (expected absolute or deviation)");
}

RefinementFlags refinement_flags(const CoefficientField& eps, const CoefficientField& sigma,
                                 double beta_eps, double beta_sigma, IndicatorMode mode,
                                 const AdmissibleSet& admissible) {
  if (!(eps.grid == sigma.grid)) throw std::invalid_argument("coefficients on different grids");
  for (double b : {beta_eps, beta_sigma}) {
    if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  }
  const Grid2D& g = eps.grid;
  const std::size_t cells = static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny);

  auto indicator = [&](const CoefficientField& f) {
    const double bg =
        mode == IndicatorMode::deviation ? admissible.background(f.role) : 0.0;
    std::vector<double> ind(cells);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const double s = std::abs(f.at(i, j) - bg) + std::abs(f.at(i + 1, j) - bg) +
                         std::abs(f.at(i, j + 1) - bg) + std::abs(f.at(i + 1, j + 1) - bg);
        ind[static_cast<std::size_t>(j) * g.nx + i] = 0.25 * g.h * s;
      }
    }
    return ind;
  };
  const auto ie = indicator(eps);
  const auto is = indicator(sigma);

  RefinementFlags out;
  out.max_eps = ie.empty() ? 0.0 : *std::max_element(ie.begin(), ie.end());
  out.max_sigma = is.empty() ? 0.0 : *std::max_element(is.begin(), is.end());
  out.flagged.assign(cells, 0);
  for (std::size_t c = 0; c < cells; ++c) {
    const bool fe = out.max_eps > 0.0 && ie[c] >= beta_eps * out.max_eps;
    const bool fs = out.max_sigma > 0.0 && is[c] >= beta_sigma * out.max_sigma;
    if (fe || fs) {
      out.flagged[c] = 1;
      ++out.count;
    }
  }
  return out;
}

InversionProblem refine_problem(const InversionProblem& problem) {
  const Grid2D fine = refine(problem.model.grid);
  InversionProblem out = problem;
  out.model.grid = fine;
  SourceSpec& src = out.model.source;
  if (src.forcing) {
    throw std::invalid_argument("volume forcing cannot be carried to a refined grid");
  }
  auto carry = [&](std::vector<double>& data) {
    if (data.empty()) return;
    CoefficientField f(problem.model.grid, Role::epsilon);
    f.values = data;
    data = transfer_to_refined(f, fine).values;
  };
  carry(src.f0);
  carry(src.f1);
  out.obs = transfer_to_refined(problem.obs, fine);
  if (!problem.reg.eps_prior.values.empty()) {
    out.reg.eps_prior = transfer_to_refined(problem.reg.eps_prior, fine);
  }
  if (!problem.reg.sigma_prior.values.empty()) {
    out.reg.sigma_prior = transfer_to_refined(problem.reg.sigma_prior, fine);
  }
  out.mask = region_mask(fine, 2 * problem.mask.frame_width());
  if (problem.eps_true) out.eps_true = transfer_to_refined(*problem.eps_true, fine);
  if (problem.sigma_true) out.sigma_true = transfer_to_refined(*problem.sigma_true, fine);
  return out;
}

AcgaResult run_acga(const InversionProblem& problem, const CoefficientField& eps0,
                    const CoefficientField& sigma0, const CgOptions& cg,
                    const AcgaOptions& options) {
  if (options.max_refinements < 0) throw std::invalid_argument("max_refinements must be >= 0");

  AcgaResult result;
  InversionProblem current = problem;
  CoefficientField eps_start = eps0;
  CoefficientField sigma_start = sigma0;
  for (int k = 0;; ++k) {
    LevelResult level;
    level.grid = current.model.grid;
    level.cga = run_cga(current, eps_start, sigma_start, cg);
    level.flags = refinement_flags(level.cga.eps, level.cga.sigma, options.beta_eps,
                                   options.beta_sigma, options.mode, current.admissible);
    if (current.eps_true && current.sigma_true) {
      const BoundaryTrace sim =
          extract_trace(current.model.solve(level.cga.eps, level.cga.sigma), current.obs.sides());
      level.final_metrics = error_metrics(level.cga.eps, level.cga.sigma, *current.eps_true,
                                          *current.sigma_true, sim, current.obs);
    }
    level.problem = current;

    // Change between consecutive levels, measured on the finer grid.
    bool small_change = false;
    if (k > 0) {
      const double de = difference_norm(level.cga.eps, eps_start);
      const double ds = difference_norm(level.cga.sigma, sigma_start);
      small_change = de < options.theta1_eps || ds < options.theta1_sigma;
    }
    const double nno = static_cast<double>(level.grid.node_count());
    const bool small_gradient = level.cga.final_g_eps_norm / nno < options.theta2_eps ||
                                level.cga.final_g_sigma_norm / nno < options.theta2_sigma;
    const bool nothing_flagged = level.flags.count == 0;
    result.levels.push_back(std::move(level));
    const LevelResult& done = result.levels.back();

    if (small_change) {
      result.stop_reason = "coefficient_change_small";
      break;
    }
    if (small_gradient) {
      result.stop_reason = "gradient_small";
      break;
    }
    if (nothing_flagged) {
      result.stop_reason = "no_cells_flagged";
      break;
    }
    if (k >= options.max_refinements) {
      result.stop_reason = "refinement_cap";
      break;
    }
    current = refine_problem(current);
    eps_start = transfer_to_refined(done.cga.eps, current.model.grid);
    sigma_start = transfer_to_refined(done.cga.sigma, current.model.grid);
    // The CGA on the new grid starts from the carried reconstruction, which
    // is therefore also its initial guess in the Tikhonov term.
    current.reg.eps_prior = eps_start;
    current.reg.sigma_prior = sigma_start;
  }
  return result;
}

void write_levels_csv(const std::filesystem::path& path, const AcgaResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kLevelsHeader << '\n';
  for (std::size_t k = 0; k < result.levels.size(); ++k) {
    const LevelResult& l = result.levels[k];
    const double nno = static_cast<double>(l.grid.node_count());
    out << k << ',' << l.grid.node_count() << ',' << fmt(l.cga.final_g_eps_norm / nno) << ','
        << fmt(l.cga.final_g_sigma_norm / nno) << ',' << fmt(l.flags.max_eps) << ','
        << fmt(l.flags.max_sigma) << ',' << l.cga.iterations << '\n';
  }
}

}  // namespace cipwave
