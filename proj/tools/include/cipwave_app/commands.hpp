#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cipwave/gradient.hpp"
#include "cipwave/optimizer.hpp"
#include "cipwave_app/config.hpp"

namespace cipwave::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitInputError = 2,
  kExitNumericalError = 3,
};

struct CommandOptions {
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;  // replaces the noise and sampling seeds
  bool quiet = false;
};

// Pieces the commands are assembled from, exposed for the tests.

Grid2D make_grid(const RunConfig& cfg);

/// Builds a coefficient field. `truth` is needed for type = truth and for
/// the bubble scale of such fields.
CoefficientField make_field(const FieldSpec& spec, const Grid2D& grid, Role role,
                            const CoefficientField* truth = nullptr);

ForwardModel make_model(const RunConfig& cfg, const Grid2D& grid);

struct TruthFields {
  CoefficientField eps;
  CoefficientField sigma;
};

std::optional<TruthFields> make_truth(const RunConfig& cfg, const Grid2D& grid);

/// Observations from [observation] file, or synthesised from the truth with
/// the configured noise.
BoundaryTrace make_observations(const RunConfig& cfg, const ForwardModel& model,
                                const std::optional<TruthFields>& truth);

struct InversionSetup {
  InversionProblem problem;
  CoefficientField eps0;
  CoefficientField sigma0;
};

InversionSetup make_inversion(const RunConfig& cfg);

/// Sample nodes for the gradient check: the configured points (nearest
/// node), or `random_nodes` distinct nodes drawn with the configured seed.
std::vector<std::size_t> grad_check_nodes(const RunConfig& cfg, const Grid2D& grid,
                                          const RegionMask& mask);

void write_grad_check_csv(const std::filesystem::path& path, const GradCheckReport& report);

int cmd_forward(const RunConfig& cfg, const CommandOptions& opt);
int cmd_synthesize(const RunConfig& cfg, const CommandOptions& opt);
int cmd_invert(const RunConfig& cfg, const CommandOptions& opt);
int cmd_invert_adaptive(const RunConfig& cfg, const CommandOptions& opt);
int cmd_grad_check(const RunConfig& cfg, const CommandOptions& opt);

/// Loads the config, applies the seed override, runs the command and maps
/// exceptions onto exit codes, reporting them on stderr.
int run_command(const std::string& command, const std::filesystem::path& config,
                const CommandOptions& opt);

}  // namespace cipwave::app
