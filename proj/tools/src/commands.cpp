#include "cipwave_app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "cipwave/errors.hpp"
#include "cipwave/field_io.hpp"

namespace cipwave::app {

namespace {

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_manifest(const std::filesystem::path& dir, const RunConfig& cfg) {
  std::ofstream out(dir / "manifest.ini");
  if (!out) throw InputError("cannot write " + (dir / "manifest.ini").string());
  out << to_ini(cfg);
}

void write_coefficients(const std::filesystem::path& dir, const CoefficientField& eps,
                        const CoefficientField& sigma) {
  write_vtk(dir / "eps_final.vtk", eps.grid, eps.values, "eps");
  write_field_csv(dir / "eps_final.csv", eps.grid, eps.values);
  write_vtk(dir / "sigma_final.vtk", sigma.grid, sigma.values, "sigma");
  write_field_csv(dir / "sigma_final.csv", sigma.grid, sigma.values);
}

double max_abs(const CoefficientField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

CgOptions with_progress(CgOptions options, const CommandOptions& opt, const std::string& tag) {
  if (opt.quiet) return options;
  options.on_iteration = [tag](const ConvergenceRow& row) {
    std::fprintf(stderr, "%sm=%d F=%.6e |g_eps|=%.3e |g_sigma|=%.3e", tag.c_str(), row.m, row.F,
                 row.g_eps_norm, row.g_sigma_norm);
    if (row.metrics) {
      std::fprintf(stderr, " e_eps=%.4f e_sigma=%.4f", row.metrics->e_eps_l2,
                   row.metrics->e_sigma_l2);
    }
    std::fputc('\n', stderr);
  };
  return options;
}

std::size_t nearest_node(const Grid2D& g, double x, double y) {
  const int i = static_cast<int>(std::lround((x - g.x0) / g.h));
  const int j = static_cast<int>(std::lround((y - g.y0) / g.h));
  if (i < 0 || j < 0 || i > g.nx || j > g.ny) {
    throw InputError("sample point (" + std::to_string(x) + ", " + std::to_string(y) +
                     ") lies outside the domain");
  }
  return g.index(i, j);
}

}  // namespace

Grid2D make_grid(const RunConfig& cfg) {
  return build_grid(cfg.nx, cfg.ny, cfg.T, cfg.cfl, cfg.admissible.lower(Role::epsilon));
}

CoefficientField make_field(const FieldSpec& spec, const Grid2D& grid, Role role,
                            const CoefficientField* truth) {
  CoefficientField f;
  if (spec.type == "constant") {
    f = CoefficientField(grid, role, spec.base);
  } else if (spec.type == "gaussian") {
    f = gaussian_coefficient(grid, role, spec.base, spec.amplitude, spec.cx, spec.cy,
                             spec.width);
  } else if (spec.type == "file") {
    f = read_field_csv(spec.file, grid, role);
  } else if (spec.type == "truth") {
    if (truth == nullptr) throw ConfigError("initial guess of type 'truth' without a truth");
    f = *truth;
    f.role = role;
  } else {
    throw ConfigError("unknown field type '" + spec.type + "'");
  }
  if (spec.bubble_factor != 0.0) f = add_bubble(f, spec.bubble_factor * max_abs(f));
  return f;
}

ForwardModel make_model(const RunConfig& cfg, const Grid2D& grid) {
  ForwardModel model;
  model.grid = grid;
  model.source.omega = cfg.omega;
  model.source.t_on = cfg.t_on;
  model.source.amplitude = cfg.amplitude;
  model.bc = cfg.bc;
  model.observed = cfg.observed;
  return model;
}

std::optional<TruthFields> make_truth(const RunConfig& cfg, const Grid2D& grid) {
  if (!cfg.truth_eps || !cfg.truth_sigma) return std::nullopt;
  return TruthFields{make_field(*cfg.truth_eps, grid, Role::epsilon),
                     make_field(*cfg.truth_sigma, grid, Role::sigma)};
}

BoundaryTrace make_observations(const RunConfig& cfg, const ForwardModel& model,
                                const std::optional<TruthFields>& truth) {
  if (!cfg.obs_file.empty()) {
    BoundaryTrace obs = read_trace_csv(cfg.obs_file, model.grid);
    if (!(obs.sides() == cfg.observed)) {
      throw InputError(cfg.obs_file.string() +
                       ": observed sides differ from [observation] sides");
    }
    return obs;
  }
  if (!truth) {
    throw ConfigError("no [observation] file and no [truth.eps]/[truth.sigma] to synthesise from");
  }
  const BoundaryTrace clean = extract_trace(model.solve(truth->eps, truth->sigma), cfg.observed);
  return add_noise(clean, cfg.noise_model, cfg.noise_level, cfg.noise_seed);
}

InversionSetup make_inversion(const RunConfig& cfg) {
  const Grid2D grid = make_grid(cfg);
  const auto truth = make_truth(cfg, grid);
  InversionProblem p;
  p.model = make_model(cfg, grid);
  p.obs = make_observations(cfg, p.model, truth);
  p.admissible = cfg.admissible;
  p.mask = region_mask(grid, cfg.frame_width);
  p.reg.gamma_eps0 = cfg.gamma_eps0;
  p.reg.gamma_sigma0 = cfg.gamma_sigma0;
  p.reg.p = cfg.p;

  CoefficientField eps0 = make_field(cfg.initial_eps, grid, Role::epsilon,
                                     truth ? &truth->eps : nullptr);
  CoefficientField sigma0 = make_field(cfg.initial_sigma, grid, Role::sigma,
                                       truth ? &truth->sigma : nullptr);
  // The Tikhonov term pulls towards the (admissible) initial guess.
  p.reg.eps_prior = project(eps0, p.admissible, p.mask);
  p.reg.sigma_prior = project(sigma0, p.admissible, p.mask);
  if (truth) {
    p.eps_true = truth->eps;
    p.sigma_true = truth->sigma;
  }
  return {std::move(p), std::move(eps0), std::move(sigma0)};
}

std::vector<std::size_t> grad_check_nodes(const RunConfig& cfg, const Grid2D& grid,
                                          const RegionMask& mask) {
  const GradCheckConfig& gc = cfg.gradcheck;
  std::vector<std::size_t> nodes;
  if (!gc.points.empty()) {
    for (const auto& [x, y] : gc.points) nodes.push_back(nearest_node(grid, x, y));
    return nodes;
  }
  std::vector<std::size_t> pool;
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    if (!gc.inner_only || !mask.is_frame(k)) pool.push_back(k);
  }
  if (static_cast<std::size_t>(gc.random_nodes) > pool.size()) {
    throw ConfigError("gradcheck.random_nodes exceeds the number of candidate nodes");
  }
  std::mt19937_64 rng(gc.seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(gc.random_nodes));
  std::sort(pool.begin(), pool.end());
  return pool;
}

void write_grad_check_csv(const std::filesystem::path& path, const GradCheckReport& report) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "node_x,node_y,which,adjoint_value,fd_value,rel_err\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g,%.17g,%.17g\n", r.x, r.y,
                  to_string(r.which).c_str(), r.adjoint, r.fd, r.rel_err);
    out << buf;
  }
}

int cmd_forward(const RunConfig& cfg, const CommandOptions& opt) {
  const Grid2D grid = make_grid(cfg);
  const auto truth = make_truth(cfg, grid);
  if (!truth) throw ConfigError("forward needs [truth.eps] and [truth.sigma]");
  const ForwardModel model = make_model(cfg, grid);
  const SpaceTimeField E = model.solve(truth->eps, truth->sigma);

  prepare_dir(opt.out);
  write_trace_csv(opt.out / "trace.csv", extract_trace(E, cfg.observed));
  if (cfg.snapshot_every > 0) {
    prepare_dir(opt.out / "snapshots");
    dump_snapshots(E, opt.out / "snapshots", "E_", cfg.snapshot_every);
  }
  write_manifest(opt.out, cfg);
  if (!opt.quiet) {
    std::printf("forward: %dx%d grid, %d time steps, dt = %.6g\n", grid.nx, grid.ny, grid.nt,
                grid.dt);
  }
  return kExitOk;
}

int cmd_synthesize(const RunConfig& cfg, const CommandOptions& opt) {
  const Grid2D grid = make_grid(cfg);
  const auto truth = make_truth(cfg, grid);
  if (!truth) throw ConfigError("synthesize needs [truth.eps] and [truth.sigma]");
  RunConfig synth = cfg;
  synth.obs_file.clear();
  const BoundaryTrace obs = make_observations(synth, make_model(cfg, grid), truth);

  prepare_dir(opt.out);
  write_trace_csv(opt.out / "obs.csv", obs);
  write_manifest(opt.out, cfg);
  if (!opt.quiet) {
    std::printf("synthesize: %s noise, level %g, seed %llu\n",
                to_string(cfg.noise_model).c_str(), cfg.noise_level,
                static_cast<unsigned long long>(cfg.noise_seed));
  }
  return kExitOk;
}

int cmd_invert(const RunConfig& cfg, const CommandOptions& opt) {
  const InversionSetup s = make_inversion(cfg);
  const CgResult r = run_cga(s.problem, s.eps0, s.sigma0, with_progress(cfg.cga, opt, ""));

  prepare_dir(opt.out);
  write_coefficients(opt.out, r.eps, r.sigma);
  write_convergence_csv(opt.out / "convergence.csv", r.log);
  write_manifest(opt.out, cfg);
  if (!opt.quiet) {
    std::printf("invert: %d iterations, stopped by %s, final F = %.6e\n", r.iterations,
                to_string(r.reason).c_str(), r.final_F);
  }
  return kExitOk;
}

int cmd_invert_adaptive(const RunConfig& cfg, const CommandOptions& opt) {
  const InversionSetup s = make_inversion(cfg);
  const AcgaResult r = run_acga(s.problem, s.eps0, s.sigma0,
                                with_progress(cfg.cga, opt, "  "), cfg.acga);

  prepare_dir(opt.out);
  for (std::size_t k = 0; k < r.levels.size(); ++k) {
    const LevelResult& level = r.levels[k];
    const auto dir = opt.out / ("level_" + std::to_string(k));
    prepare_dir(dir);
    write_coefficients(dir, level.cga.eps, level.cga.sigma);
    write_convergence_csv(dir / "convergence.csv", level.cga.log);
  }
  write_levels_csv(opt.out / "levels.csv", r);
  write_manifest(opt.out, cfg);
  if (!opt.quiet) {
    std::printf("invert-adaptive: %zu level(s), stopped by %s\n", r.levels.size(),
                r.stop_reason.c_str());
  }
  return kExitOk;
}

int cmd_grad_check(const RunConfig& cfg, const CommandOptions& opt) {
  const InversionSetup s = make_inversion(cfg);
  const InversionProblem& p = s.problem;
  ObjectiveContext ctx;
  ctx.model = p.model;
  ctx.obs = p.obs;
  ctx.reg = p.reg;
  ctx.gamma_eps = cfg.gamma_eps0;
  ctx.gamma_sigma = cfg.gamma_sigma0;
  ctx.admissible = p.admissible;
  ctx.mask = p.mask;

  const CoefficientField eps = project(s.eps0, p.admissible, p.mask);
  const CoefficientField sigma = project(s.sigma0, p.admissible, p.mask);
  const auto nodes = grad_check_nodes(cfg, p.model.grid, p.mask);
  const GradCheckReport report =
      grad_check(ctx, eps, sigma, nodes, cfg.gradcheck.h_fd, cfg.gradcheck.tolerance,
                 cfg.gradcheck.threshold, cfg.cga.gradient,
                 cfg.gradcheck.flip_sign ? -1.0 : 1.0);

  prepare_dir(opt.out);
  write_grad_check_csv(opt.out / "gradcheck.csv", report);
  write_manifest(opt.out, cfg);
  if (!opt.quiet) {
    std::printf("grad-check: %zu rows, median relative mismatch %.3e, %s\n", report.rows.size(),
                report.median_rel_err, report.passed ? "PASS" : "FAIL");
  }
  return report.passed ? kExitOk : kExitCheckFailed;
}

int run_command(const std::string& command, const std::filesystem::path& config,
                const CommandOptions& opt) {
  try {
    RunConfig cfg = load_config(config);
    if (opt.seed) {
      cfg.noise_seed = *opt.seed;
      cfg.gradcheck.seed = *opt.seed;
    }
    if (command == "forward") return cmd_forward(cfg, opt);
    if (command == "synthesize") return cmd_synthesize(cfg, opt);
    if (command == "invert") return cmd_invert(cfg, opt);
    if (command == "invert-adaptive") return cmd_invert_adaptive(cfg, opt);
    if (command == "grad-check") return cmd_grad_check(cfg, opt);
    std::cerr << "error: unknown command '" << command << "'\n";
    return kExitInputError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kExitNumericalError;
  }
}

}  // namespace cipwave::app
