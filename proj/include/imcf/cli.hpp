#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "imcf/capgeom.hpp"
#include "imcf/diagnostics.hpp"
#include "imcf/flowcore.hpp"
#include "imcf/warpfn.hpp"

namespace imcf::cli {

enum ExitCode : int { kOk = 0, kMonitorViolation = 1, kSingularity = 2, kConfigError = 3 };

struct WarpConfig {
  std::string name = "euclidean";  // euclidean | hyperboloidal | tabulated
  double a = 1.0;
  double alpha = 1.0;
  std::optional<double> c_bound;
  std::optional<double> base_point;
  std::vector<std::pair<double, double>> table;
};

struct InitialConfig {
  std::string shape = "cosine-even";  // cosine-even | bump | tilted
  double amplitude = 0.0;
};

struct OutputConfig {
  std::string directory = "imcf-out";
  bool emit_fields = false;
  bool emit_plots = false;
};

struct ExperimentConfig {
  WarpConfig warp;
  int n = 2;
  double theta0 = 0.0;
  cap::Mode mode = cap::Mode::axisym;
  int n_theta = 256;
  int n_psi = 1;
  double r0 = 1.0;
  flow::FlowConfig flow;
  InitialConfig initial;
  OutputConfig output;
  std::vector<int> levels = {128, 256, 512};
  std::optional<std::pair<double, double>> fit_window;
  std::string source;  // path or "<string>"
};

/// Strict JSON schema; throws ConfigError naming the key path and line.
ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<string>");
ExperimentConfig parse_config(const std::string& path);

std::shared_ptr<const warp::WarpSpec> make_warp(const WarpConfig& config);
/// Initial radius u0 on the mesh.
cap::ScalarField initial_radius(const ExperimentConfig& config, const cap::CapMesh& mesh);
graph::GraphState initial_state(const ExperimentConfig& config);

struct RunResult {
  warp::ConditionReport warp_report;
  flow::Trajectory trajectory;
  diag::BoundsReport report;
  int exit_code = kOk;
};

/// validate -> build -> evolve -> diagnostics, without writing files. Throws ConfigError.
RunResult run_experiment(const ExperimentConfig& config);
int exit_code_for(const flow::Trajectory& traj, const diag::BoundsReport& report);

/// Writes series.csv, summary.json and the optional outputs into directory.
void write_outputs(const ExperimentConfig& config, const RunResult& result,
                   const std::string& directory);

int cmd_run(const ExperimentConfig& config, const std::string& out_dir);
int cmd_validate_warp(const ExperimentConfig& config);

struct ConvergenceLevel {
  int n_theta = 0;
  double h = 0.0;
  double radial_error = 0.0;  // max relative error against the radial solution
  double functional = 0.0;    // u at the theta0 node at t_end, perturbed run
  flow::Status status = flow::Status::completed;
};

struct ConvergenceResult {
  std::vector<ConvergenceLevel> levels;
  double observed_order = 0.0;
  double max_radial_error = 0.0;
  int exit_code = kOk;
};

/// Throws ConfigError for fewer than 3 levels.
ConvergenceResult convergence_study(const ExperimentConfig& config, const std::vector<int>& levels);
int cmd_convergence(const ExperimentConfig& config, const std::vector<int>& levels,
                    const std::string& out_dir);

/// One output directory per config; exit code is the first nonzero per-run code.
int cmd_sweep(const std::vector<ExperimentConfig>& configs, const std::string& out_dir, int jobs);

}  // namespace imcf::cli
