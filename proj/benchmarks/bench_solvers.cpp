// Cost of the three kernels an inversion iteration is built from, at the
// grid sizes used by the shipped presets.
#include <benchmark/benchmark.h>

#include "cipwave/adjoint_solver.hpp"
#include "cipwave/gradient.hpp"

using namespace cipwave;

namespace {

struct Case {
  ForwardModel model;
  CoefficientField eps;
  CoefficientField sigma;
  BoundaryTrace obs;
};

Case make_case(int nx) {
  Case c;
  c.model.grid = build_grid(nx, nx, 1.2, 0.5, 1.0);
  const Grid2D& g = c.model.grid;
  c.eps = gaussian_coefficient(g, Role::epsilon, 1.0, 3.0, 0.5, 0.7, 0.002);
  c.sigma = gaussian_coefficient(g, Role::sigma, 1.0, 1.5, 0.5, 0.7, 0.002);
  c.obs = extract_trace(c.model.solve(c.eps, c.sigma), SideSet::all());
  return c;
}

void set_counters(benchmark::State& state, const Grid2D& g) {
  const double updates = static_cast<double>(g.node_count()) * g.nt;
  state.counters["node_updates/s"] =
      benchmark::Counter(updates, benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Forward(benchmark::State& state) {
  const Case c = make_case(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.model.solve(c.eps, c.sigma));
  }
  set_counters(state, c.model.grid);
}

void BM_Adjoint(benchmark::State& state) {
  const Case c = make_case(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_adjoint(c.model.grid, c.eps, c.sigma, c.obs, c.model.bc, c.model.source));
  }
  set_counters(state, c.model.grid);
}

// Full gradient: forward solve, residual, adjoint solve and assembly.
void BM_Gradient(benchmark::State& state) {
  const Case c = make_case(static_cast<int>(state.range(0)));
  ObjectiveContext ctx;
  ctx.model = c.model;
  ctx.obs = c.obs;
  ctx.mask = region_mask(c.model.grid, 0);
  ctx.reg.eps_prior = CoefficientField(c.model.grid, Role::epsilon, 1.0);
  ctx.reg.sigma_prior = CoefficientField(c.model.grid, Role::sigma, 1.0);
  ctx.gamma_eps = 0.01;
  ctx.gamma_sigma = 0.01;
  const CoefficientField eps(c.model.grid, Role::epsilon, 1.0);
  const CoefficientField sigma(c.model.grid, Role::sigma, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_gradient(ctx, eps, sigma));
  }
  set_counters(state, c.model.grid);
}

}  // namespace

BENCHMARK(BM_Forward)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Adjoint)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gradient)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
