#include <CLI11.hpp>

#include <string>
#include <vector>

#include "imcf/cli.hpp"
#include "imcf/errors.hpp"
#include "imcf/log.hpp"

using namespace imcf;

namespace {

int with_configs(const std::vector<std::string>& paths, std::vector<cli::ExperimentConfig>& out) {
  try {
    for (const auto& p : paths) { out.push_back(cli::parse_config(p)); }
  } catch (const ConfigError& e) {
    log::error("{}", e.what());
    return cli::kConfigError;
  }
  return cli::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse mean curvature flow of capillary graphs in warped cones"};
  app.require_subcommand(1);

  std::string out_dir;
  int jobs = 1;
  std::vector<std::string> configs;
  std::vector<int> levels;

  auto* run = app.add_subcommand("run", "Evolve one configuration and check the a-priori bounds");
  run->add_option("--config", configs, "JSON experiment file")->required()->expected(1);
  run->add_option("--out", out_dir, "Output directory (overrides output.directory)");

  auto* sweep = app.add_subcommand("sweep", "Run several configurations");
  sweep->add_option("--config", configs, "JSON experiment files")->required();
  sweep->add_option("--out", out_dir, "Root output directory");
  sweep->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* conv = app.add_subcommand("convergence", "Grid refinement study");
  conv->add_option("--config", configs, "JSON experiment file")->required()->expected(1);
  conv->add_option("--out", out_dir, "Output directory");
  conv->add_option("--levels", levels, "n_theta per level (default: config levels)");

  auto* val = app.add_subcommand("validate-warp", "Sample the warping-function hypotheses");
  val->add_option("--config", configs, "JSON experiment file")->required()->expected(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  std::vector<cli::ExperimentConfig> parsed;
  if (const int code = with_configs(configs, parsed); code != cli::kOk) { return code; }

  if (*run) { return cli::cmd_run(parsed.front(), out_dir); }
  if (*sweep) { return cli::cmd_sweep(parsed, out_dir, jobs); }
  if (*conv) {
    return cli::cmd_convergence(parsed.front(), levels.empty() ? parsed.front().levels : levels,
                                out_dir);
  }
  return cli::cmd_validate_warp(parsed.front());
}
