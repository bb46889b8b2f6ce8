#include "imcf/oracle.hpp"

#include <fmt/core.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "imcf/errors.hpp"

namespace imcf::oracle {

RadialSolution::RadialSolution(std::shared_ptr<const warp::WarpSpec> warp, double r0, int dim_n,
                               bool force_integrator)
    : warp_(std::move(warp)), r0_(r0), dim_(dim_n) {
  const auto family = warp_->family;
  closed_form_ = !force_integrator &&
                 (family == warp::Family::euclidean || family == warp::Family::hyperboloidal);
}

double RadialSolution::u(double t) const {
  if (t == 0.0) { return r0_; }
  if (!closed_form_) { return integrate(t); }
  if (warp_->family == warp::Family::euclidean) { return r0_ * std::exp(t / dim_); }
  const double a2 = warp_->scale * warp_->scale;
  return std::sqrt((r0_ * r0_ + a2) * std::exp(2.0 * t / dim_) - a2);
}

double RadialSolution::integrate(double t) const {
  namespace odeint = boost::numeric::odeint;
  using Stepper    = odeint::runge_kutta_dopri5<double>;
  const warp::WarpSpec& spec = *warp_;
  const double n             = dim_;
  auto system = [&spec, n](const double& u, double& dudt, double) {
    const auto w = warp::eval(spec, u);
    dudt         = w.lambda / (n * w.dlambda);
  };
  double u = r0_;
  try {
    odeint::integrate_adaptive(odeint::make_controlled<Stepper>(1e-14, 1e-10), system, u, 0.0, t,
                               1e-3 * std::max(1.0, std::abs(t)));
  } catch (const std::exception& e) {
    throw NumericError(fmt::format("radial ODE integration failed at t = {}: {}", t, e.what()));
  }
  if (!std::isfinite(u)) { throw NumericError("radial ODE integration produced a non-finite u"); }
  return u;
}

RadialSolution radial_solution(std::shared_ptr<const warp::WarpSpec> warp, double r0, int dim_n) {
  if (dim_n < 1) { throw ConfigError(fmt::format("dimension must be positive, got {}", dim_n)); }
  if (!warp->interval.contains_interior(r0)) {
    throw ConfigError(fmt::format("r0 = {} outside I° of warp '{}'", r0, warp->name));
  }
  return RadialSolution(std::move(warp), r0, dim_n);
}

ComparisonReport compare(const flow::Trajectory& traj, const RadialSolution& exact) {
  if (traj.snapshots.empty()) { throw ConfigError("empty trajectory"); }
  const auto& first = traj.front().state;
  if (first.mesh().dim() != exact.dim()) {
    throw ConfigError(fmt::format("trajectory dimension {} differs from oracle dimension {}",
                                  first.mesh().dim(), exact.dim()));
  }
  if (first.warp().name != exact.warp().name || first.warp().scale != exact.warp().scale) {
    throw ConfigError(fmt::format("trajectory warp '{}' differs from oracle warp '{}'",
                                  first.warp().name, exact.warp().name));
  }
  for (double u : first.u().values()) {
    if (std::abs(u - exact.r0()) > 1e-12 * exact.r0()) {
      throw ConfigError(fmt::format("trajectory is not radial with r0 = {} (found u = {})",
                                    exact.r0(), u));
    }
  }

  ComparisonReport report;
  for (const auto& snap : traj.snapshots) {
    ComparisonRow row;
    row.t       = snap.t();
    row.u_exact = exact.u(row.t);
    for (double u : snap.state.u().values()) {
      row.max_abs_error = std::max(row.max_abs_error, std::abs(u - row.u_exact));
    }
    row.max_rel_error    = row.max_abs_error / std::abs(row.u_exact);
    report.max_abs_error = std::max(report.max_abs_error, row.max_abs_error);
    report.max_rel_error = std::max(report.max_rel_error, row.max_rel_error);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace imcf::oracle
