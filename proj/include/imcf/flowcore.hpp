#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "imcf/graphsurf.hpp"

namespace imcf::flow {

enum class Scheme { rk4, heun };

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& text);

struct FlowConfig {
  double t_end           = 1.0;
  double dt_initial      = 1e-4;
  double cfl_safety      = 0.5;
  double snapshot_stride = 0.1;
  long max_steps         = 100'000'000;
  Scheme scheme          = Scheme::rk4;

  /// Throws ConfigError.
  void validate() const;
};

enum class Status { completed, singularity, domain_exit, step_failure };

std::string to_string(Status status);

struct Snapshot {
  graph::GraphState state;
  graph::CurvatureFields curvature;
  cap::ScalarField phidot;
  double neumann_res = 0.0;

  double t() const { return state.t(); }
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  Status status = Status::completed;
  std::string message;
  std::vector<double> dt_log;
  long steps    = 0;
  long rejected = 0;
  /// Initial data has H > 0 but a nonpositive principal curvature somewhere.
  bool convexity_warning = false;
  double initial_min_curvature = 0.0;
  /// Normal derivative of phi at theta0 before the one-shot boundary fix.
  double initial_neumann_defect = 0.0;

  const Snapshot& front() const { return snapshots.front(); }
  const Snapshot& back() const { return snapshots.back(); }
};

/// phidot split into the radial rate of the level and the rate of the deviation field.
struct SplitRate {
  double level_rate = 0.0;
  cap::ScalarField deviation_rate;
  /// Gershgorin bound of the frozen-coefficient linearization (spectral radius estimate).
  double stiffness = 0.0;
};

/// Throws SingularityError when n lambda' - sigma~^{ij} phi_{i,j} <= 0 at some node.
SplitRate split_rate(const graph::GraphState& state);
/// phidot = v^2 / (n lambda' - sigma~^{ij} phi_{i,j}) per node.
cap::ScalarField rhs(const graph::GraphState& state);

/// Sets the boundary row so the one-sided second-order theta derivative vanishes; other rows are
/// untouched and the map is idempotent.
void apply_neumann(const cap::CapMesh& mesh, std::span<double> field);
graph::GraphState apply_neumann(const graph::GraphState& state);

/// Largest explicit step allowed by the stability heuristic.
double stable_dt(const graph::GraphState& state, Scheme scheme, double cfl_safety);

/// One explicit step with the boundary condition enforced at every stage. Throws SingularityError,
/// DomainError or NumericError.
graph::GraphState step(const graph::GraphState& state, double dt, Scheme scheme = Scheme::rk4);

/// Throws ConfigError for incompatible initial data (H <= 0 somewhere or a boundary slope that the
/// one-shot fix cannot absorb). Singularities during the run end it with a partial trajectory.
Trajectory evolve(const graph::GraphState& initial, const FlowConfig& config);

Snapshot make_snapshot(const graph::GraphState& state);

}  // namespace imcf::flow
