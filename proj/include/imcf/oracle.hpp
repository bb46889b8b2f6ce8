#pragma once

#include <memory>
#include <vector>

#include "imcf/flowcore.hpp"
#include "imcf/warpfn.hpp"

namespace imcf::oracle {

/// Radial solution u(t) of the flow: with v = 1 and vanishing Hessian the graph equation becomes
/// phidot = 1 / (n lambda'(u)), and u' = lambda(u) phidot gives du/dt = lambda(u) / (n lambda'(u)).
class RadialSolution {
 public:
  RadialSolution(std::shared_ptr<const warp::WarpSpec> warp, double r0, int dim_n,
                 bool force_integrator = false);

  double r0() const { return r0_; }
  int dim() const { return dim_; }
  const warp::WarpSpec& warp() const { return *warp_; }
  bool closed_form() const { return closed_form_; }

  /// Throws NumericError if the integrator fails.
  double u(double t) const;
  double operator()(double t) const { return u(t); }

 private:
  double integrate(double t) const;

  std::shared_ptr<const warp::WarpSpec> warp_;
  double r0_;
  int dim_;
  bool closed_form_;
};

/// Throws ConfigError for r0 outside I° or n < 1.
RadialSolution radial_solution(std::shared_ptr<const warp::WarpSpec> warp, double r0, int dim_n);

struct ComparisonRow {
  double t = 0.0;
  double u_exact = 0.0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
};

/// Throws ConfigError when the trajectory does not start from u = r0 with the same warp and n.
ComparisonReport compare(const flow::Trajectory& traj, const RadialSolution& exact);

}  // namespace imcf::oracle
