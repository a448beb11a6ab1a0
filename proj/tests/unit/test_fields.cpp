#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cipwave/fields.hpp"
#include "cipwave/forward_solver.hpp"
#include "support.hpp"

using namespace cipwave;

TEST(GaussianCoefficient, PeakAtCentre) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const CoefficientField f = gaussian_coefficient(g, Role::epsilon, 1, 3, 0.5, 0.7, 0.002);
  EXPECT_DOUBLE_EQ(f.at(5, 7), 4.0);
}

TEST(GaussianCoefficient, DecaysToBaseFarAway) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const CoefficientField f = gaussian_coefficient(g, Role::epsilon, 1, 3, 0.5, 0.7, 0.002);
  EXPECT_NEAR(f.at(0, 0), 1.0, 1e-12);
}

TEST(GaussianCoefficient, ZeroAmplitudeIsConstant) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const CoefficientField f = gaussian_coefficient(g, Role::sigma, 2.5, 0, 0.5, 0.7, 0.002);
  for (double v : f.values) EXPECT_EQ(v, 2.5);
}

TEST(AddBubble, VanishesOnTheBoundaryAndPeaksInTheMiddle) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const CoefficientField f = add_bubble(CoefficientField(g, Role::epsilon, 1.0), 16.0 * 16.0);
  EXPECT_DOUBLE_EQ(f.at(0, 3), 1.0);
  EXPECT_DOUBLE_EQ(f.at(10, 3), 1.0);
  EXPECT_DOUBLE_EQ(f.at(4, 0), 1.0);
  // x^2 y^2 (1-x)^2 (1-y)^2 = 1/256 at (0.5, 0.5).
  EXPECT_NEAR(f.at(5, 5), 2.0, 1e-12);
}

TEST(Project, ClampsToTheBox) {
  const Grid2D g = build_grid(10, 10, 1.0);
  AdmissibleSet adm;
  adm.sigma_min = 0.0;
  adm.sigma_background = 0.0;
  const RegionMask mask = region_mask(g, 0);
  CoefficientField eps(g, Role::epsilon, 2.0);
  eps.at(3, 3) = 12.0;
  eps.at(4, 4) = 0.5;
  CoefficientField sigma(g, Role::sigma, 0.2);
  sigma.at(3, 3) = -0.3;
  const CoefficientField pe = project(eps, adm, mask);
  const CoefficientField ps = project(sigma, adm, mask);
  EXPECT_EQ(pe.at(3, 3), 10.0);
  EXPECT_EQ(pe.at(4, 4), 1.0);
  EXPECT_EQ(pe.at(5, 5), 2.0);
  EXPECT_EQ(ps.at(3, 3), 0.0);
}

TEST(Project, PinsFrameToBackground) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const AdmissibleSet adm;
  const RegionMask mask = region_mask(g, 2);
  const CoefficientField p = project(CoefficientField(g, Role::epsilon, 3.0), adm, mask);
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    EXPECT_EQ(p.values[k], mask.is_frame(k) ? 1.0 : 3.0);
  }
}

TEST(Project, AdmissibleFieldIsUnchangedAndProjectionIsIdempotent) {
  const Grid2D g = build_grid(16, 16, 1.0);
  const AdmissibleSet adm;
  const RegionMask mask = region_mask(g, 1);
  const CoefficientField ok = project(fixture::test1_eps(g), adm, mask);
  EXPECT_EQ(project(ok, adm, mask).values, ok.values);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 20.0);
  CoefficientField wild(g, Role::sigma);
  for (double& v : wild.values) v = u(rng);
  const CoefficientField once = project(wild, adm, mask);
  EXPECT_EQ(project(once, adm, mask).values, once.values);
}

TEST(AdmissibleSet, RejectsInconsistentBounds) {
  AdmissibleSet a;
  a.eps_background = 0.5;
  EXPECT_THROW(a.validate(), std::invalid_argument);
  AdmissibleSet b;
  b.sigma_min = 11.0;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  EXPECT_NO_THROW(AdmissibleSet{}.validate());
}

namespace {

BoundaryTrace smooth_trace(const Grid2D& g, SideSet sides) {
  BoundaryTrace t(g, sides);
  for (int n = 0; n < t.levels(); ++n) {
    for (Side s : sides.list()) {
      auto v = t.side_values(n, s);
      for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = std::sin(20.0 * g.t(n)) * (1.0 + 0.1 * static_cast<double>(k));
      }
    }
  }
  return t;
}

double noise_std(const BoundaryTrace& noisy, const BoundaryTrace& clean) {
  const auto a = noisy.data();
  const auto b = clean.data();
  double mean = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) mean += a[k] - b[k];
  mean /= static_cast<double>(a.size());
  double var = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) var += std::pow(a[k] - b[k] - mean, 2);
  return std::sqrt(var / static_cast<double>(a.size() - 1));
}

}  // namespace

TEST(AddNoise, ZeroLevelIsIdentity) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const BoundaryTrace t = smooth_trace(g, SideSet::all());
  for (auto model : {NoiseModel::additive_gaussian, NoiseModel::relative_gaussian}) {
    const BoundaryTrace n = add_noise(t, model, 0.0, 9);
    EXPECT_TRUE(std::equal(n.data().begin(), n.data().end(), t.data().begin()));
  }
}

TEST(AddNoise, AdditiveStandardDeviation) {
  const Grid2D g = build_grid(20, 20, 1.2);
  const BoundaryTrace t = smooth_trace(g, SideSet::all());
  ASSERT_GE(t.data().size(), 5000u);  // std error of the estimate is under 1%
  const double s = noise_std(add_noise(t, NoiseModel::additive_gaussian, 0.1, 42), t);
  EXPECT_NEAR(s, 0.1, 0.005);
}

TEST(AddNoise, RelativeStandardDeviationScalesWithPeak) {
  const Grid2D g = build_grid(20, 20, 1.2);
  BoundaryTrace t = smooth_trace(g, SideSet::all());
  const double peak = fixture::max_abs(t.data());
  const double s = noise_std(add_noise(t, NoiseModel::relative_gaussian, 0.1, 42), t);
  EXPECT_NEAR(s, 0.1 * peak, 0.005 * peak);
}

TEST(AddNoise, DeterministicAndIndependentOfSignal) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const BoundaryTrace a = smooth_trace(g, SideSet::all());
  BoundaryTrace b(g, SideSet::all());
  const BoundaryTrace na1 = add_noise(a, NoiseModel::additive_gaussian, 0.1, 3);
  const BoundaryTrace na2 = add_noise(a, NoiseModel::additive_gaussian, 0.1, 3);
  const BoundaryTrace nb = add_noise(b, NoiseModel::additive_gaussian, 0.1, 3);
  EXPECT_TRUE(std::equal(na1.data().begin(), na1.data().end(), na2.data().begin()));
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    EXPECT_NEAR(na1.data()[k] - a.data()[k], nb.data()[k], 1e-15);
  }
  const BoundaryTrace other = add_noise(a, NoiseModel::additive_gaussian, 0.1, 4);
  EXPECT_FALSE(std::equal(na1.data().begin(), na1.data().end(), other.data().begin()));
}

TEST(AddNoise, NegativeLevelIsRejected) {
  const Grid2D g = build_grid(10, 10, 1.0);
  EXPECT_THROW(add_noise(BoundaryTrace(g, SideSet::all()), NoiseModel::additive_gaussian, -1.0, 1),
               std::invalid_argument);
}

TEST(NoiseModel, NamesRoundTrip) {
  for (auto m : {NoiseModel::additive_gaussian, NoiseModel::relative_gaussian}) {
    EXPECT_EQ(noise_model_from_string(to_string(m)), m);
  }
  EXPECT_THROW(noise_model_from_string("uniform"), std::invalid_argument);
}

TEST(ExtractTrace, ZeroFieldGivesZeroTrace) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const BoundaryTrace t = extract_trace(SpaceTimeField(g, SpaceTimeRole::state), SideSet::all());
  EXPECT_EQ(fixture::max_abs(t.data()), 0.0);
  EXPECT_EQ(t.levels(), g.nt + 1);
}

TEST(ExtractTrace, PerimeterHasFortyNodesOnElevenByEleven) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const BoundaryTrace t(g, SideSet::all());
  EXPECT_EQ(t.boundary_node_count(), 40u);
}

TEST(ExtractTrace, OnlyDeclaredSidesCarryData) {
  const Grid2D g = build_grid(10, 10, 1.0);
  SpaceTimeField f(g, SpaceTimeRole::state);
  for (int n = 0; n <= g.nt; ++n) {
    auto s = f.snapshot(n);
    for (int j = 0; j <= g.ny; ++j) {
      for (int i = 0; i <= g.nx; ++i) s[g.index(i, j)] = 100.0 * n + 10.0 * i + j;
    }
  }
  const BoundaryTrace t = extract_trace(f, SideSet{Side::right});
  EXPECT_EQ(t.values_per_level(), 11u);
  EXPECT_TRUE(t.sides().contains(Side::right));
  EXPECT_FALSE(t.sides().contains(Side::left));
  const auto v = t.side_values(3, Side::right);
  for (int j = 0; j <= g.ny; ++j) EXPECT_EQ(v[static_cast<std::size_t>(j)], 300.0 + 100.0 + j);
}

TEST(ExtractTrace, EmptySideSetIsRejected) {
  const Grid2D g = build_grid(10, 10, 1.0);
  EXPECT_THROW(extract_trace(SpaceTimeField(g, SpaceTimeRole::state), SideSet{}),
               std::invalid_argument);
}

TEST(TransferToRefined, ReproducesConstantsAndLinears) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const Grid2D f = refine(g);
  const CoefficientField c = transfer_to_refined(CoefficientField(g, Role::epsilon, 2.5), f);
  for (double v : c.values) EXPECT_EQ(v, 2.5);

  CoefficientField lin(g, Role::epsilon);
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) lin.at(i, j) = 1.0 + 2.0 * g.x(i) - 0.7 * g.y(j);
  }
  const CoefficientField fine = transfer_to_refined(lin, f);
  for (int j = 0; j <= f.ny; ++j) {
    for (int i = 0; i <= f.nx; ++i) {
      EXPECT_NEAR(fine.at(i, j), 1.0 + 2.0 * f.x(i) - 0.7 * f.y(j), 1e-12);
    }
  }
}

TEST(TransferToRefined, RestrictionUndoesInterpolation) {
  const Grid2D g = build_grid(12, 12, 1.0);
  const CoefficientField c = fixture::test1_eps(g);
  const CoefficientField back = restrict_to_coarse(transfer_to_refined(c, refine(g)), g);
  EXPECT_EQ(back.values, c.values);
}

TEST(TransferToRefined, TraceTimeInterpolationError) {
  const Grid2D g = build_grid(16, 16, 1.2);
  const Grid2D f = refine(g);
  BoundaryTrace t(g, SideSet{Side::left});
  for (int n = 0; n < t.levels(); ++n) {
    for (double& v : t.side_values(n, Side::left)) v = std::sin(20.0 * g.t(n));
  }
  const BoundaryTrace fine = transfer_to_refined(t, f);
  ASSERT_EQ(fine.levels(), f.nt + 1);
  const double bound = std::pow(20.0 * g.dt, 2) / 8.0;
  double worst = 0.0;
  for (int n = 0; n < fine.levels(); ++n) {
    for (double v : fine.side_values(n, Side::left)) {
      worst = std::max(worst, std::abs(v - std::sin(20.0 * f.t(n))));
    }
  }
  EXPECT_LE(worst, bound);
  EXPECT_GT(worst, 0.0);
}

TEST(TransferToRefined, RejectsNonNestedGrids) {
  const Grid2D g = build_grid(10, 10, 1.0);
  EXPECT_THROW(transfer_to_refined(CoefficientField(g, Role::epsilon, 1.0),
                                   build_grid(30, 30, 1.0)),
               std::invalid_argument);
}

TEST(TransferToRefined, TraceSpaceMidpointsAreAverages) {
  const Grid2D g = build_grid(10, 10, 1.0);
  const Grid2D f = refine(g);
  BoundaryTrace t(g, SideSet{Side::bottom});
  for (int n = 0; n < t.levels(); ++n) {
    auto v = t.side_values(n, Side::bottom);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k * k);
  }
  const BoundaryTrace fine = transfer_to_refined(t, f);
  const auto v = fine.side_values(0, Side::bottom);
  EXPECT_EQ(v[4], 4.0);
  EXPECT_EQ(v[5], 0.5 * (4.0 + 9.0));
}
