#include <CLI11.hpp>

#include <string>

#include "cipwave_app/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cipwave: coefficient reconstruction for the damped wave equation"};
  app.require_subcommand(1);

  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool quiet = false;

  const std::pair<const char*, const char*> commands[] = {
      {"forward", "Solve the forward problem for the true coefficients, write trace.csv"},
      {"synthesize", "Simulate noisy boundary observations, write obs.csv"},
      {"invert", "Reconstruct eps and sigma with the conjugate gradient method"},
      {"invert-adaptive", "Reconstruct on a sequence of refined grids"},
      {"grad-check", "Compare adjoint gradients with finite differences"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "INI configuration file")->required();
    sub->add_option("--out", out, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Overrides the noise and sampling seeds");
    sub->add_flag("--quiet", quiet, "Suppress progress output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cipwave::app::kExitInputError;
  }

  cipwave::app::CommandOptions opt;
  opt.out = out;
  opt.quiet = quiet;
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) opt.seed = seed;
    return cipwave::app::run_command(sub->get_name(), config, opt);
  }
  return cipwave::app::kExitInputError;
}
