#include <gtest/gtest.h>

#include <cmath>

#include "cipwave/gradient.hpp"
#include "support.hpp"

using namespace cipwave;

namespace {

struct Problem {
  ObjectiveContext ctx;
  CoefficientField eps;
  CoefficientField sigma;
};

// Test-1 data, evaluated at a smooth admissible guess.
Problem make_problem(int nx, int frame = 0, double gamma = 0.0) {
  Problem p;
  p.ctx.model = fixture::small_model(nx);
  const Grid2D& g = p.ctx.model.grid;
  p.ctx.obs = extract_trace(p.ctx.model.solve(fixture::test1_eps(g), fixture::test1_sigma(g)),
                            SideSet::all());
  p.ctx.mask = region_mask(g, frame);
  p.ctx.reg.eps_prior = CoefficientField(g, Role::epsilon, 1.0);
  p.ctx.reg.sigma_prior = CoefficientField(g, Role::sigma, 1.0);
  p.ctx.gamma_eps = gamma;
  p.ctx.gamma_sigma = gamma;
  p.eps = project(gaussian_coefficient(g, Role::epsilon, 1.25, 1.5, 0.5, 0.7, 0.02),
                  p.ctx.admissible, p.ctx.mask);
  p.sigma = project(gaussian_coefficient(g, Role::sigma, 1.25, 0.75, 0.5, 0.7, 0.02),
                    p.ctx.admissible, p.ctx.mask);
  return p;
}

}  // namespace

TEST(AssembleGradients, ZeroAdjointAtThePriorGivesZero) {
  const Grid2D g = build_grid(12, 12, 1.0);
  const SpaceTimeField E(g, SpaceTimeRole::state);
  const SpaceTimeField lambda(g, SpaceTimeRole::adjoint);
  RegularizationParams reg;
  reg.eps_prior = fixture::test1_eps(g);
  reg.sigma_prior = fixture::test1_sigma(g);
  const Gradients gr = assemble_gradients(E, lambda, reg.eps_prior, reg.sigma_prior, reg, 0.5,
                                          0.5, region_mask(g, 0));
  EXPECT_EQ(fixture::max_abs(gr.g_eps.values), 0.0);
  EXPECT_EQ(fixture::max_abs(gr.g_sigma.values), 0.0);
}

TEST(AssembleGradients, RegularizationTermOnInnerNodesOnly) {
  const Grid2D g = build_grid(12, 12, 1.0);
  const SpaceTimeField E(g, SpaceTimeRole::state);
  const SpaceTimeField lambda(g, SpaceTimeRole::adjoint);
  RegularizationParams reg;
  reg.eps_prior = CoefficientField(g, Role::epsilon, 1.0);
  reg.sigma_prior = CoefficientField(g, Role::sigma, 1.0);
  const RegionMask mask = region_mask(g, 2);
  const Gradients gr = assemble_gradients(E, lambda, CoefficientField(g, Role::epsilon, 2.0),
                                          reg.sigma_prior, reg, 0.3, 0.0, mask);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    EXPECT_DOUBLE_EQ(gr.g_eps.values[k], mask.is_frame(k) ? 0.0 : 0.3);
  }
}

TEST(EvaluateGradient, FrameNodesArePinned) {
  const Problem p = make_problem(16, 2);
  const GradientEvaluation ev = evaluate_gradient(p.ctx, p.eps, p.sigma);
  for (std::size_t k = 0; k < p.ctx.mask.size(); ++k) {
    if (!p.ctx.mask.is_frame(k)) continue;
    EXPECT_EQ(ev.gradients.g_eps.values[k], 0.0);
    EXPECT_EQ(ev.gradients.g_sigma.values[k], 0.0);
  }
}

TEST(EvaluateGradient, RegularizationPartIsLinearInGamma) {
  Problem p = make_problem(16);
  p.ctx.gamma_eps = 0.0;
  const auto g0 = evaluate_gradient(p.ctx, p.eps, p.sigma).gradients.g_eps.values;
  p.ctx.gamma_eps = 0.2;
  const auto g1 = evaluate_gradient(p.ctx, p.eps, p.sigma).gradients.g_eps.values;
  p.ctx.gamma_eps = 0.4;
  const auto g2 = evaluate_gradient(p.ctx, p.eps, p.sigma).gradients.g_eps.values;
  for (std::size_t k = 0; k < g0.size(); ++k) {
    EXPECT_NEAR(g2[k] - g0[k], 2.0 * (g1[k] - g0[k]), 1e-14);
  }
}

TEST(FdOracle, FrameDirectionIsFlat) {
  const Problem p = make_problem(16, 1);
  const auto s = fd_gradient_oracle(p.ctx, p.eps, p.sigma, {0, p.ctx.model.grid.index(0, 5)},
                                    Role::epsilon, 1e-3);
  for (const auto& v : s) EXPECT_NEAR(v.value, 0.0, 1e-10);
}

TEST(FdOracle, QuadraticRegularizationIsDifferentiatedExactly) {
  Problem p = make_problem(16, 0, 1.0);
  p.ctx.include_misfit = false;
  const Grid2D& g = p.ctx.model.grid;
  const std::vector<std::size_t> nodes = {g.index(8, 11), g.index(3, 4), g.index(0, 7)};
  const auto s = fd_gradient_oracle(p.ctx, p.eps, p.sigma, nodes, Role::epsilon, 1e-3);
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    EXPECT_NEAR(s[q].value, p.eps.values[nodes[q]] - 1.0, 1e-8);
  }
}

TEST(FdOracle, StepSizePlateau) {
  const Problem p = make_problem(16);
  const std::vector<std::size_t> node = {p.ctx.model.grid.index(8, 11)};
  std::vector<double> v;
  for (double h : {1e-2, 1e-3, 1e-4}) {
    v.push_back(fd_gradient_oracle(p.ctx, p.eps, p.sigma, node, Role::sigma, h)[0].value);
  }
  EXPECT_NEAR(v[0], v[1], 0.01 * std::abs(v[1]));
  EXPECT_NEAR(v[1], v[2], 0.01 * std::abs(v[1]));
}

TEST(FdOracle, InadmissibleProbeIsRejected) {
  Problem p = make_problem(16);
  p.eps = CoefficientField(p.ctx.model.grid, Role::epsilon, 1.0);
  EXPECT_THROW(fd_gradient_oracle(p.ctx, p.eps, p.sigma, {p.ctx.model.grid.index(5, 5)},
                                  Role::epsilon, 1e-3),
               std::domain_error);
}

// The centered rule carries an O(dt) consistency error of roughly 5e-5 in
// absolute terms here, so it is only compared where the gradient is large.
// Quiet nodes such as (6, 6) are left to the staggered test below.
TEST(GradCheck, AdjointMatchesFiniteDifferences) {
  const Problem p = make_problem(24);
  const Grid2D& g = p.ctx.model.grid;
  const std::vector<std::size_t> nodes = {g.index(12, 17), g.index(11, 16), g.index(20, 12)};
  const GradCheckReport r = grad_check(p.ctx, p.eps, p.sigma, nodes, 1e-3);
  EXPECT_TRUE(r.passed);
  ASSERT_EQ(r.rows.size(), 2 * nodes.size());
  for (const auto& row : r.rows) {
    if (row.qualifies) EXPECT_LE(row.rel_err, 5e-2) << row.x << ',' << row.y;
  }
}

TEST(GradCheck, StaggeredRuleMatchesMoreTightly) {
  const Problem p = make_problem(24);
  const Grid2D& g = p.ctx.model.grid;
  GradientOptions opt;
  opt.rule = TimeDerivativeRule::staggered;
  const GradCheckReport r =
      grad_check(p.ctx, p.eps, p.sigma, {g.index(12, 17), g.index(6, 6)}, 1e-3, 1e-3, 1e-3, opt);
  EXPECT_TRUE(r.passed);
}

TEST(GradCheck, FlippedSignIsDetected) {
  const Problem p = make_problem(24);
  const Grid2D& g = p.ctx.model.grid;
  const GradCheckReport r =
      grad_check(p.ctx, p.eps, p.sigma, {g.index(12, 17)}, 1e-3, 5e-2, 1e-3, {}, -1.0);
  EXPECT_FALSE(r.passed);
}

TEST(GradCheck, FrameRowsAreZero) {
  const Problem p = make_problem(24, 2);
  const GradCheckReport r = grad_check(p.ctx, p.eps, p.sigma, {0}, 1e-3);
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.frame);
    EXPECT_EQ(row.adjoint, 0.0);
    EXPECT_EQ(row.fd, 0.0);
    EXPECT_EQ(row.rel_err, 0.0);
  }
}
