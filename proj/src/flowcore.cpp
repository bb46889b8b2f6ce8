#include "imcf/flowcore.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "imcf/errors.hpp"
#include "imcf/log.hpp"

namespace imcf::flow {

std::string to_string(Scheme scheme) { return scheme == Scheme::rk4 ? "rk4" : "heun"; }

Scheme parse_scheme(const std::string& text) {
  if (text == "rk4") { return Scheme::rk4; }
  if (text == "heun") { return Scheme::heun; }
  throw ConfigError(fmt::format("unknown scheme '{}' (expected rk4 or heun)", text));
}

std::string to_string(Status status) {
  switch (status) {
    case Status::completed: return "completed";
    case Status::singularity: return "singularity";
    case Status::domain_exit: return "domain-exit";
    case Status::step_failure: return "step-failure";
  }
  return "unknown";
}

void FlowConfig::validate() const {
  if (!(t_end > 0.0)) { throw ConfigError(fmt::format("t_end must be positive, got {}", t_end)); }
  if (!(dt_initial > 0.0)) {
    throw ConfigError(fmt::format("dt_initial must be positive, got {}", dt_initial));
  }
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) {
    throw ConfigError(fmt::format("cfl_safety must lie in (0, 1], got {}", cfl_safety));
  }
  if (!(snapshot_stride > 0.0)) {
    throw ConfigError(fmt::format("snapshot_stride must be positive, got {}", snapshot_stride));
  }
  if (max_steps < 1) { throw ConfigError("max_steps must be at least 1"); }
}

namespace {

// Real-axis stability limits of the explicit schemes.
double stability_limit(Scheme scheme) { return scheme == Scheme::rk4 ? 2.785 : 2.0; }

// Evaluates the split rate on raw (level, w) buffers.
//
//   phidot = v^2 / D,  D = n lambda'(u) - S,  S = sigma~^{ij} w_{i,j}
//   level' = 1 / (n lambda'(u(level)))
//   q = phidot - level' = (|grad w|^2 - level' n dlp + level' S) / D,  dlp = lambda'(u) - lambda'(u(level))
class Kernel {
 public:
  Kernel(const cap::CapMesh& mesh, const warp::RadialChart& chart)
      : mesh_(mesh), chart_(chart), shift_(mesh.size()) {
    const auto range = chart.phi_range();
    phi_lo_          = range.first;
    phi_hi_          = range.second;
  }

  double rate(double level, std::span<const double> w, std::span<double> q, double* stiffness) {
    const auto [wmin, wmax] = std::minmax_element(w.begin(), w.end());
    if (!(level + *wmin > phi_lo_) || !(level + *wmax < phi_hi_)) {
      throw DomainError(fmt::format("phi range [{}, {}] leaves the chart image", level + *wmin,
                                    level + *wmax));
    }
    chart_.slope_shifts(level, w, shift_);
    const double n     = mesh_.dim();
    const double nl    = n * chart_.slope(level);
    const double rref  = 1.0 / nl;
    const cap::Jet d   = cap::jet(mesh_, w);
    const double h     = mesh_.h_theta();
    const int nt       = mesh_.n_theta();
    double rho         = 0.0;

    if (!mesh_.periodic()) {
      const double fiber = n - 1.0;
      for (int k = 0; k < nt; ++k) {
        const double wt  = d.d_theta[k];
        const double wtt = d.d_theta_theta[k];
        const double g2  = wt * wt;
        const double v2  = 1.0 + g2;
        const double cot = mesh_.cot_theta(k);
        const double S   = wtt / v2 + fiber * cot * wt;
        const double D   = nl + n * shift_[k] - S;
        if (!(D > 0.0)) { throw SingularityError(k, mesh_.theta(k), 0.0, D); }
        q[k] = (g2 - rref * n * shift_[k] + rref * S) / D;
        if (stiffness != nullptr && k + 1 < nt) {
          const double inv_d = 1.0 / D;
          const double a     = inv_d * inv_d;
          const double b     = 2.0 * wt * inv_d + v2 * a * (fiber * cot - 2.0 * wt * wtt / (v2 * v2));
          rho                = std::max(rho, 4.0 * a / (h * h) + std::abs(b) / h);
        }
      }
    } else {
      const double hp = mesh_.h_psi();
      for (int j = 0; j < mesh_.n_psi(); ++j) {
        for (int k = 0; k < nt; ++k) {
          const std::size_t i = mesh_.index(k, j);
          const double s      = mesh_.sin_theta(k);
          const double c      = mesh_.cos_theta(k);
          const double s2     = s * s;
          const double wt     = d.d_theta[i];
          const double wp     = d.d_psi[i];
          const double g2     = wt * wt + wp * wp / s2;
          const double v2     = 1.0 + g2;
          const double utt    = 1.0 - wt * wt / v2;
          const double utp    = -wt * wp / (s2 * v2);
          const double upp    = 1.0 / s2 - wp * wp / (s2 * s2 * v2);
          const double cot    = c / s;
          const double S      = utt * d.d_theta_theta[i] +
                           2.0 * utp * (d.d_theta_psi[i] - cot * wp) +
                           upp * (d.d_psi_psi[i] + s * c * wt);
          const double D = nl + n * shift_[i] - S;
          if (!(D > 0.0)) { throw SingularityError(i, mesh_.theta(k), mesh_.psi(j), D); }
          q[i] = (g2 - rref * n * shift_[i] + rref * S) / D;
          if (stiffness != nullptr && k + 1 < nt) {
            const double inv_d = 1.0 / D;
            const double a     = v2 * inv_d * inv_d;
            const double bt    = 2.0 * wt * inv_d + a * upp * s * c;
            const double bp    = 2.0 * wp * inv_d / s2 - 2.0 * a * utp * cot;
            const double r     = 4.0 * a * utt / (h * h) + 4.0 * a * upp / (hp * hp) +
                             2.0 * a * std::abs(utp) / (h * hp) + std::abs(bt) / h +
                             std::abs(bp) / hp;
            rho = std::max(rho, r);
          }
        }
      }
    }
    if (stiffness != nullptr) { *stiffness = rho; }
    return rref;
  }

 private:
  const cap::CapMesh& mesh_;
  const warp::RadialChart& chart_;
  std::vector<double> shift_;
  double phi_lo_ = 0.0;
  double phi_hi_ = 0.0;
};

struct Raw {
  double level = 0.0;
  std::vector<double> w;
};

void require_finite(const Raw& y) {
  if (!std::isfinite(y.level) ||
      !std::all_of(y.w.begin(), y.w.end(), [](double x) { return std::isfinite(x); })) {
    throw NumericError("non-finite values in the flow state");
  }
}

void recentre(const cap::CapMesh& mesh, Raw& y) {
  const auto& weights = mesh.weights();
  double acc          = 0.0;
  double total        = 0.0;
  for (std::size_t i = 0; i < y.w.size(); ++i) {
    acc += weights[i] * y.w[i];
    total += weights[i];
  }
  const double mean = acc / total;
  if (mean == 0.0) { return; }
  y.level += mean;
  for (double& x : y.w) { x -= mean; }
}

class Stepper {
 public:
  Stepper(const cap::CapMesh& mesh, const warp::RadialChart& chart, Scheme scheme)
      : mesh_(mesh), kernel_(mesh, chart), scheme_(scheme) {
    for (auto& k : k_) { k.resize(mesh.size()); }
    stage_.w.resize(mesh.size());
  }

  // Rate at y into slot 0 together with the stiffness estimate.
  double prime(const Raw& y) {
    double rho = 0.0;
    level_k_[0] = kernel_.rate(y.level, y.w, k_[0], &rho);
    return rho;
  }

  // Advances y by dt; slot 0 must hold the rate at y.
  Raw advance(const Raw& y, double dt) {
    Raw out;
    if (scheme_ == Scheme::rk4) {
      stage(y, 0.5 * dt, 0);
      level_k_[1] = kernel_.rate(stage_.level, stage_.w, k_[1], nullptr);
      stage(y, 0.5 * dt, 1);
      level_k_[2] = kernel_.rate(stage_.level, stage_.w, k_[2], nullptr);
      stage(y, dt, 2);
      level_k_[3] = kernel_.rate(stage_.level, stage_.w, k_[3], nullptr);
      const double c = dt / 6.0;
      out.level = y.level + c * (level_k_[0] + 2.0 * level_k_[1] + 2.0 * level_k_[2] + level_k_[3]);
      out.w.resize(y.w.size());
      for (std::size_t i = 0; i < y.w.size(); ++i) {
        out.w[i] = y.w[i] + c * (k_[0][i] + 2.0 * k_[1][i] + 2.0 * k_[2][i] + k_[3][i]);
      }
    } else {
      stage(y, dt, 0);
      level_k_[1] = kernel_.rate(stage_.level, stage_.w, k_[1], nullptr);
      const double c = 0.5 * dt;
      out.level      = y.level + c * (level_k_[0] + level_k_[1]);
      out.w.resize(y.w.size());
      for (std::size_t i = 0; i < y.w.size(); ++i) { out.w[i] = y.w[i] + c * (k_[0][i] + k_[1][i]); }
    }
    apply_neumann(mesh_, out.w);
    require_finite(out);
    recentre(mesh_, out);
    return out;
  }

 private:
  void stage(const Raw& y, double a, int slot) {
    stage_.level = y.level + a * level_k_[slot];
    for (std::size_t i = 0; i < y.w.size(); ++i) { stage_.w[i] = y.w[i] + a * k_[slot][i]; }
    apply_neumann(mesh_, stage_.w);
    require_finite(stage_);
  }

  const cap::CapMesh& mesh_;
  Kernel kernel_;
  Scheme scheme_;
  std::vector<double> k_[4];
  double level_k_[4] = {0.0, 0.0, 0.0, 0.0};
  Raw stage_;
};

Raw raw_of(const graph::GraphState& state) { return {state.level(), state.deviation().values()}; }

graph::GraphState state_of(const graph::GraphState& like, Raw y, double t) {
  return graph::GraphState::from_phi(like.mesh_ptr(), like.chart_ptr(), y.level,
                                     cap::ScalarField(std::move(y.w)), t);
}

double max_abs(const std::vector<double>& values) {
  double m = 0.0;
  for (double x : values) { m = std::max(m, std::abs(x)); }
  return m;
}

}  // namespace

SplitRate split_rate(const graph::GraphState& state) {
  Kernel kernel(state.mesh(), state.chart());
  SplitRate out;
  out.deviation_rate = cap::ScalarField(state.mesh().size());
  out.level_rate =
      kernel.rate(state.level(), state.deviation().span(), out.deviation_rate.span(), &out.stiffness);
  return out;
}

cap::ScalarField rhs(const graph::GraphState& state) {
  auto split = split_rate(state);
  for (double& x : split.deviation_rate.values()) { x += split.level_rate; }
  return std::move(split.deviation_rate);
}

void apply_neumann(const cap::CapMesh& mesh, std::span<double> field) {
  const int b = mesh.n_theta() - 1;
  for (int j = 0; j < mesh.n_psi(); ++j) {
    field[mesh.index(b, j)] =
        (4.0 * field[mesh.index(b - 1, j)] - field[mesh.index(b - 2, j)]) / 3.0;
  }
}

graph::GraphState apply_neumann(const graph::GraphState& state) {
  cap::ScalarField w = state.deviation();
  apply_neumann(state.mesh(), w.span());
  return graph::GraphState::from_phi(state.mesh_ptr(), state.chart_ptr(), state.level(),
                                     std::move(w), state.t());
}

double stable_dt(const graph::GraphState& state, Scheme scheme, double cfl_safety) {
  const double rho = split_rate(state).stiffness;
  if (!(rho > 0.0)) { return std::numeric_limits<double>::infinity(); }
  return cfl_safety * stability_limit(scheme) / rho;
}

graph::GraphState step(const graph::GraphState& state, double dt, Scheme scheme) {
  if (dt == 0.0) { return state; }
  Stepper stepper(state.mesh(), state.chart(), scheme);
  const Raw y = raw_of(state);
  stepper.prime(y);
  return state_of(state, stepper.advance(y, dt), state.t() + dt);
}

Snapshot make_snapshot(const graph::GraphState& state) {
  Snapshot snap{state, graph::shape_operator(state), rhs(state), 0.0};
  snap.neumann_res = max_abs(cap::boundary_normal_derivative(state.mesh(), state.deviation()));
  return snap;
}

Trajectory evolve(const graph::GraphState& initial, const FlowConfig& config) {
  config.validate();
  const auto& mesh = initial.mesh();
  Trajectory traj;

  // One-shot boundary fix; a slope the fix would have to absorb beyond O(h) is rejected.
  traj.initial_neumann_defect =
      max_abs(cap::boundary_normal_derivative(mesh, initial.deviation()));
  const auto jet0        = cap::jet(mesh, initial.deviation().span());
  const double tolerance = 1e-8 + mesh.h_theta() * max_abs(jet0.d_theta_theta);
  if (traj.initial_neumann_defect > tolerance) {
    throw ConfigError(fmt::format(
        "initial data violates the boundary condition: normal derivative {} exceeds {}",
        traj.initial_neumann_defect, tolerance));
  }
  graph::GraphState state = apply_neumann(initial);

  try {
    split_rate(state);
  } catch (const SingularityError& e) {
    throw ConfigError(fmt::format("initial data is not mean convex: {}", e.what()));
  }
  traj.snapshots.push_back(make_snapshot(state));
  if (traj.snapshots.back().neumann_res > 1e-8) {
    throw ConfigError("initial boundary residual above 1e-8 after the boundary fix");
  }
  traj.initial_min_curvature = traj.snapshots.back().curvature.min_principal();
  if (!(traj.initial_min_curvature > 0.0)) {
    traj.convexity_warning = true;
    log::info("initial data has H > 0 but min principal curvature {} <= 0",
              traj.initial_min_curvature);
  }

  std::vector<double> targets;
  for (long i = 1;; ++i) {
    const double t = i * config.snapshot_stride;
    if (t >= config.t_end * (1.0 - 1e-12)) { break; }
    targets.push_back(t);
  }
  targets.push_back(config.t_end);

  Stepper stepper(mesh, initial.chart(), config.scheme);
  Raw y          = raw_of(state);
  double t       = 0.0;
  std::size_t next = 0;
  const double limit = stability_limit(config.scheme);

  auto stop = [&](Status status, const std::string& message) {
    traj.status  = status;
    traj.message = message;
    log::info("flow stopped at t = {}: {} ({})", t, to_string(status), message);
  };

  while (next < targets.size()) {
    if (traj.steps >= config.max_steps) {
      stop(Status::step_failure, fmt::format("max_steps = {} reached", config.max_steps));
      break;
    }
    double rho = 0.0;
    try {
      rho = stepper.prime(y);
    } catch (const SingularityError& e) {
      stop(Status::singularity, e.what());
      break;
    } catch (const DomainError& e) {
      stop(Status::domain_exit, e.what());
      break;
    }
    const double target = targets[next];
    double dt = rho > 0.0 ? config.cfl_safety * limit / rho : target - t;
    if (traj.steps == 0) { dt = std::min(dt, config.dt_initial); }
    bool lands = false;
    if (dt >= target - t) {
      dt    = target - t;
      lands = true;
    }

    bool accepted = false;
    for (int halving = 0; halving <= 20 && !accepted; ++halving) {
      try {
        y        = stepper.advance(y, dt);
        accepted = true;
      } catch (const std::exception& e) {
        if (halving == 20) {
          if (dynamic_cast<const SingularityError*>(&e) != nullptr) {
            stop(Status::singularity, e.what());
          } else if (dynamic_cast<const DomainError*>(&e) != nullptr) {
            stop(Status::domain_exit, e.what());
          } else {
            stop(Status::step_failure, e.what());
          }
          break;
        }
        ++traj.rejected;
        dt *= 0.5;
        lands = false;
      }
    }
    if (!accepted) { break; }

    t = lands ? target : t + dt;
    ++traj.steps;
    traj.dt_log.push_back(dt);
    if (lands) {
      try {
        traj.snapshots.push_back(make_snapshot(state_of(initial, y, t)));
      } catch (const std::exception& e) {
        stop(Status::step_failure, e.what());
        break;
      }
      log::debug("snapshot t = {} after {} steps (dt = {})", t, traj.steps, dt);
      ++next;
    }
  }
  return traj;
}

}  // namespace imcf::flow
