#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cipwave/errors.hpp"
#include "cipwave/fields.hpp"
#include "cipwave/forward_solver.hpp"
#include "cipwave/optimizer.hpp"

namespace cipwave::app {

/// How a coefficient field is built on a grid.
struct FieldSpec {
  std::string type = "constant";  // constant | gaussian | file | truth
  double base = 1.0;              // constant value, or gaussian background
  double amplitude = 0.0;
  double cx = 0.5;
  double cy = 0.5;
  double width = 0.002;
  std::filesystem::path file;     // type = file: CSV with x,y,value
  double bubble_factor = 0.0;     // adds factor * max|field| * X^2 Y^2 (1-X)^2 (1-Y)^2
};

struct GradCheckConfig {
  int random_nodes = 8;
  std::vector<std::pair<double, double>> points;  // explicit sample points, used if nonempty
  std::uint64_t seed = 7;
  bool inner_only = true;
  double h_fd = 1e-3;
  double tolerance = 5e-2;
  double threshold = 1e-3;
  bool flip_sign = false;  // negates the adjoint gradient; the check must then fail
};

/// Effective configuration of one run, every default materialised.
struct RunConfig {
  std::filesystem::path origin;  // file the config was read from, if any

  int nx = 0;
  int ny = 0;
  double T = 1.2;
  double cfl = 0.5;
  int frame_width = 0;

  std::optional<FieldSpec> truth_eps;
  std::optional<FieldSpec> truth_sigma;
  FieldSpec initial_eps;
  FieldSpec initial_sigma;

  double omega = 20.0;
  double t_on = 0.31415926535897931;
  double amplitude = 1.0;
  BcConfig bc;

  SideSet observed = SideSet::all();
  std::filesystem::path obs_file;  // empty: synthesise from the truth

  NoiseModel noise_model = NoiseModel::relative_gaussian;
  double noise_level = 0.1;
  std::uint64_t noise_seed = 42;

  double gamma_eps0 = 0.01;
  double gamma_sigma0 = 0.01;
  double p = 0.5;

  AdmissibleSet admissible;
  CgOptions cga;
  AcgaOptions acga;
  GradCheckConfig gradcheck;

  int snapshot_every = 0;
};

/// Malformed or inconsistent configuration. The message names the key and,
/// when known, the line.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

RunConfig parse_config(std::istream& in, const std::string& name,
                       const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// The configuration as INI text that parses back to the same RunConfig.
std::string to_ini(const RunConfig& cfg);

}  // namespace cipwave::app
