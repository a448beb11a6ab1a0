#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cipwave/field_io.hpp"
#include "cipwave_app/commands.hpp"

using namespace cipwave;
namespace fs = std::filesystem;

namespace {

const char* kBase =
    "[grid]\nnx = 16\n"
    "[truth.eps]\ntype = gaussian\nbase = 1\namplitude = 3\ncenter = 0.5, 0.7\nwidth = 0.002\n"
    "[truth.sigma]\ntype = gaussian\nbase = 1\namplitude = 1.5\ncenter = 0.5, 0.7\nwidth = 0.002\n";

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cipwave_cmd_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& extra,
                      const std::string& base = kBase) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << base << extra;
  return p;
}

int run(const std::string& cmd, const fs::path& cfg, const fs::path& out,
        std::optional<std::uint64_t> seed = std::nullopt) {
  app::CommandOptions opt;
  opt.out = out;
  opt.quiet = true;
  opt.seed = seed;
  return app::run_command(cmd, cfg, opt);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Forward, WritesEveryTimeLevel) {
  const fs::path dir = fresh_dir("forward");
  ASSERT_EQ(run("forward", write_config(dir, ""), dir / "out"), 0);
  const Grid2D g = build_grid(16, 16, 1.2);
  const BoundaryTrace t = read_trace_csv(dir / "out" / "trace.csv", g);
  EXPECT_EQ(t.levels(), g.nt + 1);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.ini"));
}

TEST(Forward, ZeroAmplitudeGivesZeroTrace) {
  const fs::path dir = fresh_dir("forward_zero");
  ASSERT_EQ(run("forward", write_config(dir, "[source]\namplitude = 0\n"), dir / "out"), 0);
  const BoundaryTrace t = read_trace_csv(dir / "out" / "trace.csv", build_grid(16, 16, 1.2));
  for (double v : t.data()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, SnapshotsOnRequest) {
  const fs::path dir = fresh_dir("forward_snap");
  ASSERT_EQ(run("forward", write_config(dir, "[output]\nsnapshot_every = 50\n"), dir / "out"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "snapshots" / "E_0.vtk"));
  EXPECT_TRUE(fs::exists(dir / "out" / "snapshots" / "E_50.vtk"));
}

TEST(Forward, MissingGridSizeIsAConfigError) {
  const fs::path dir = fresh_dir("forward_nonx");
  const fs::path cfg = write_config(dir, "", "[grid]\nT = 1.2\n");
  testing::internal::CaptureStderr();
  EXPECT_EQ(run("forward", cfg, dir / "out"), 2);
  EXPECT_NE(testing::internal::GetCapturedStderr().find("grid.nx"), std::string::npos);
}

TEST(Forward, UnstableMediumIsANumericalFailure) {
  const fs::path dir = fresh_dir("forward_cfl");
  const std::string base =
      "[grid]\nnx = 16\n[truth.eps]\ntype = constant\nbase = 0.2\n"
      "[truth.sigma]\ntype = constant\nbase = 1\n";
  testing::internal::CaptureStderr();
  EXPECT_EQ(run("forward", write_config(dir, "", base), dir / "out"), 3);
  testing::internal::GetCapturedStderr();
}

TEST(Synthesize, ZeroNoiseEqualsTheForwardTrace) {
  const fs::path dir = fresh_dir("synth_zero");
  const fs::path cfg = write_config(dir, "[noise]\nlevel = 0\n");
  ASSERT_EQ(run("forward", cfg, dir / "fwd"), 0);
  ASSERT_EQ(run("synthesize", cfg, dir / "syn"), 0);
  EXPECT_EQ(slurp(dir / "fwd" / "trace.csv"), slurp(dir / "syn" / "obs.csv"));
}

TEST(Synthesize, DeterministicAndSeedSensitive) {
  const fs::path dir = fresh_dir("synth_det");
  const fs::path cfg = write_config(dir, "[noise]\nlevel = 0.1\nseed = 42\n");
  ASSERT_EQ(run("synthesize", cfg, dir / "a"), 0);
  ASSERT_EQ(run("synthesize", cfg, dir / "b"), 0);
  ASSERT_EQ(run("synthesize", cfg, dir / "c", 43), 0);
  EXPECT_EQ(slurp(dir / "a" / "obs.csv"), slurp(dir / "b" / "obs.csv"));
  EXPECT_NE(slurp(dir / "a" / "obs.csv"), slurp(dir / "c" / "obs.csv"));
  EXPECT_NE(slurp(dir / "c" / "manifest.ini").find("seed = 43"), std::string::npos);
}

TEST(Synthesize, RelativeNoiseLevel) {
  const fs::path dir = fresh_dir("synth_rel");
  const fs::path cfg =
      write_config(dir, "[noise]\nmodel = relative_gaussian\nlevel = 0.1\n");
  ASSERT_EQ(run("forward", cfg, dir / "fwd"), 0);
  ASSERT_EQ(run("synthesize", cfg, dir / "syn"), 0);
  const Grid2D g = build_grid(16, 16, 1.2);
  const BoundaryTrace clean = read_trace_csv(dir / "fwd" / "trace.csv", g);
  const BoundaryTrace noisy = read_trace_csv(dir / "syn" / "obs.csv", g);
  double peak = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < clean.data().size(); ++k) {
    peak = std::max(peak, std::abs(clean.data()[k]));
    sq += std::pow(noisy.data()[k] - clean.data()[k], 2);
  }
  const double sd = std::sqrt(sq / static_cast<double>(clean.data().size()));
  EXPECT_NEAR(sd, 0.1 * peak, 0.01 * peak);
}

TEST(Manifest, RerunReproducesOutputs) {
  const fs::path dir = fresh_dir("manifest");
  ASSERT_EQ(run("synthesize", write_config(dir, "[noise]\nlevel = 0.05\nseed = 9\n"), dir / "a"),
            0);
  ASSERT_EQ(run("synthesize", dir / "a" / "manifest.ini", dir / "b"), 0);
  EXPECT_EQ(slurp(dir / "a" / "obs.csv"), slurp(dir / "b" / "obs.csv"));
  EXPECT_EQ(slurp(dir / "a" / "manifest.ini"), slurp(dir / "b" / "manifest.ini"));
}

TEST(Invert, ZeroIterationsWritesTheInitialGuess) {
  const fs::path dir = fresh_dir("invert_zero");
  ASSERT_EQ(run("invert", write_config(dir, "[cga]\nmax_iterations = 0\n"), dir / "out"), 0);
  const Grid2D g = build_grid(16, 16, 1.2);
  const CoefficientField eps = read_field_csv(dir / "out" / "eps_final.csv", g, Role::epsilon);
  for (double v : eps.values) EXPECT_EQ(v, 1.0);
  EXPECT_TRUE(csv_rows(dir / "out" / "convergence.csv").empty());
  EXPECT_TRUE(fs::exists(dir / "out" / "sigma_final.vtk"));
}

TEST(Invert, PerturbedStartLowersTheMisfit) {
  const fs::path dir = fresh_dir("invert_t2");
  const std::string extra =
      "[initial.eps]\ntype = truth\nbubble_factor = 20\n"
      "[initial.sigma]\ntype = truth\nbubble_factor = 20\n"
      "[cga]\nmax_iterations = 12\nalpha_max = 10\nalpha0_eps = 10\nalpha0_sigma = 10\n";
  ASSERT_EQ(run("invert", write_config(dir, extra), dir / "out"), 0);
  const auto rows = csv_rows(dir / "out" / "convergence.csv");
  ASSERT_GE(rows.size(), 2u);
  EXPECT_LE(rows.size(), 12u);
  EXPECT_LT(std::stod(rows.back()[1]), std::stod(rows.front()[1]));
  EXPECT_LT(std::stod(rows.back()[2]), std::stod(rows.front()[2]));
}

TEST(Invert, ObservationsOnAnotherGridAreRejected) {
  const fs::path dir = fresh_dir("invert_mismatch");
  ASSERT_EQ(run("synthesize", write_config(dir, ""), dir / "syn"), 0);
  const std::string base =
      "[grid]\nnx = 20\n[observation]\nfile = syn/obs.csv\n[cga]\nmax_iterations = 1\n";
  testing::internal::CaptureStderr();
  EXPECT_EQ(run("invert", write_config(dir, "", base), dir / "out"), 2);
  testing::internal::GetCapturedStderr();
}

TEST(Invert, ObservationFileDrivesTheInversion) {
  const fs::path dir = fresh_dir("invert_file");
  ASSERT_EQ(run("synthesize", write_config(dir, ""), dir / "syn"), 0);
  const std::string base =
      "[grid]\nnx = 16\n[observation]\nfile = syn/obs.csv\n[cga]\nmax_iterations = 2\n";
  EXPECT_EQ(run("invert", write_config(dir, "", base), dir / "out"), 0);
  // Without a truth the error columns stay empty.
  const auto rows = csv_rows(dir / "out" / "convergence.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][2], "nan");
}

TEST(InvertAdaptive, NoRefinementMatchesInvert) {
  const fs::path dir = fresh_dir("acga_zero");
  const fs::path cfg =
      write_config(dir, "[cga]\nmax_iterations = 3\n[acga]\nmax_refinements = 0\n");
  ASSERT_EQ(run("invert", cfg, dir / "plain"), 0);
  ASSERT_EQ(run("invert-adaptive", cfg, dir / "adapt"), 0);
  EXPECT_EQ(slurp(dir / "plain" / "eps_final.csv"), slurp(dir / "adapt" / "level_0" / "eps_final.csv"));
  EXPECT_EQ(slurp(dir / "plain" / "convergence.csv"),
            slurp(dir / "adapt" / "level_0" / "convergence.csv"));
  EXPECT_EQ(csv_rows(dir / "adapt" / "levels.csv").size(), 1u);
}

TEST(InvertAdaptive, FlatReconstructionIsNotRefined) {
  const fs::path dir = fresh_dir("acga_flat");
  const std::string base =
      "[grid]\nnx = 16\n[truth.eps]\ntype = constant\nbase = 1\n"
      "[truth.sigma]\ntype = constant\nbase = 1\n[noise]\nlevel = 0\n";
  const fs::path cfg = write_config(
      dir, "[cga]\nmax_iterations = 2\n[acga]\nmax_refinements = 2\nbeta_eps = 0.99\n"
           "beta_sigma = 0.99\nmode = deviation\n",
      base);
  ASSERT_EQ(run("invert-adaptive", cfg, dir / "out"), 0);
  EXPECT_EQ(csv_rows(dir / "out" / "levels.csv").size(), 1u);
  EXPECT_FALSE(fs::exists(dir / "out" / "level_1"));
}

TEST(InvertAdaptive, OneRefinementQuadruplesCells) {
  const fs::path dir = fresh_dir("acga_one");
  const fs::path cfg = write_config(
      dir, "[initial.eps]\ntype = truth\nbubble_factor = 20\n"
           "[initial.sigma]\ntype = truth\nbubble_factor = 20\n"
           "[cga]\nmax_iterations = 2\n[acga]\nmax_refinements = 1\n");
  ASSERT_EQ(run("invert-adaptive", cfg, dir / "out"), 0);
  const auto rows = csv_rows(dir / "out" / "levels.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "289");
  EXPECT_EQ(rows[1][1], "1089");  // (2*16+1)^2 nodes for 4x the cells
  EXPECT_TRUE(fs::exists(dir / "out" / "level_1" / "eps_final.vtk"));
}

TEST(GradCheck, ShippedPresetPasses) {
  const fs::path dir = fresh_dir("gc_preset");
  ASSERT_EQ(run("grad-check", fs::path(CIPWAVE_PRESET_DIR) / "gradcheck.ini", dir), 0);
  const auto rows = csv_rows(dir / "gradcheck.csv");
  EXPECT_EQ(rows.size(), 16u);
  std::ifstream in(dir / "gradcheck.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "node_x,node_y,which,adjoint_value,fd_value,rel_err");
}

TEST(GradCheck, FlippedSignFails) {
  const fs::path dir = fresh_dir("gc_flip");
  const std::string preset = slurp(fs::path(CIPWAVE_PRESET_DIR) / "gradcheck.ini");
  const fs::path cfg = write_config(dir, "flip_sign = true\n", preset);
  EXPECT_EQ(run("grad-check", cfg, dir / "out"), 1);
}

TEST(GradCheck, FrameNodeRowsAreZero) {
  const fs::path dir = fresh_dir("gc_frame");
  std::string preset = slurp(fs::path(CIPWAVE_PRESET_DIR) / "gradcheck.ini");
  preset.replace(preset.find("frame_width = 0"), 15, "frame_width = 2");
  const fs::path cfg = write_config(dir, "points = 0, 0\n", preset);
  EXPECT_EQ(run("grad-check", cfg, dir / "out"), 0);
  for (const auto& row : csv_rows(dir / "out" / "gradcheck.csv")) {
    EXPECT_EQ(std::stod(row[3]), 0.0);
    EXPECT_EQ(std::stod(row[4]), 0.0);
    EXPECT_EQ(std::stod(row[5]), 0.0);
  }
}

TEST(GradCheck, InadmissibleProbeIsAnInputError) {
  const fs::path dir = fresh_dir("gc_probe");
  const fs::path cfg = write_config(dir, "[gradcheck]\npoints = 0.5, 0.5\n");
  testing::internal::CaptureStderr();
  EXPECT_EQ(run("grad-check", cfg, dir / "out"), 2);
  EXPECT_NE(testing::internal::GetCapturedStderr().find("h_fd"), std::string::npos);
}

TEST(Executable, UsageAndExitCodes) {
  const std::string exe = CIPWAVE_EXE;
  const fs::path dir = fresh_dir("exe");
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  EXPECT_EQ(status(exe + " --help"), 0);
  EXPECT_EQ(status(exe), 2);
  EXPECT_EQ(status(exe + " forward"), 2);
  EXPECT_EQ(status(exe + " forward --config " + (dir / "nope.ini").string()), 2);
  const fs::path cfg = write_config(dir, "");
  EXPECT_EQ(status(exe + " synthesize --quiet --seed 5 --config " + cfg.string() + " --out " +
                   (dir / "out").string()),
            0);
  EXPECT_NE(slurp(dir / "out" / "manifest.ini").find("seed = 5"), std::string::npos);
}
