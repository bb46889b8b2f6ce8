#include "imcf/graphsurf.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "imcf/errors.hpp"

namespace imcf::graph {

GraphState GraphState::from_radius(MeshPtr mesh, ChartPtr chart, const cap::ScalarField& u,
                                   double t) {
  if (u.size() != mesh->size()) {
    throw ConfigError(fmt::format("radius field has {} values, mesh has {} nodes", u.size(),
                                  mesh->size()));
  }
  std::vector<double> phi(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) { phi[i] = chart->phi(u[i]); }

  // Level is the weighted mean of phi; equal inputs give w = 0 exactly.
  double level = phi[0];
  if (!std::all_of(phi.begin(), phi.end(), [&](double p) { return p == phi[0]; })) {
    double total = 0.0;
    double acc   = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      acc += mesh->weights()[i] * phi[i];
      total += mesh->weights()[i];
    }
    level = acc / total;
  }
  cap::ScalarField w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) { w[i] = phi[i] - level; }
  return from_phi(std::move(mesh), std::move(chart), level, std::move(w), t);
}

GraphState GraphState::from_phi(MeshPtr mesh, ChartPtr chart, double level,
                                cap::ScalarField deviation, double t) {
  if (deviation.size() != mesh->size()) {
    throw ConfigError(fmt::format("deviation field has {} values, mesh has {} nodes",
                                  deviation.size(), mesh->size()));
  }
  GraphState state;
  state.t_     = t;
  state.level_ = level;
  state.w_     = std::move(deviation);
  state.mesh_  = std::move(mesh);
  state.chart_ = std::move(chart);
  state.refresh();
  return state;
}

void GraphState::refresh() {
  if (!std::isfinite(level_) || !w_.all_finite()) {
    throw NumericError(fmt::format("non-finite graph state at t = {}", t_));
  }
  const auto [lo, hi] = chart_->phi_range();
  const double top    = level_ + w_.max();
  const double bottom = level_ + w_.min();
  if (!(bottom > lo) || !(top < hi)) {
    throw DomainError(
        fmt::format("phi range [{}, {}] leaves the chart image ({}, {})", bottom, top, lo, hi));
  }
  u_level_ = chart_->u(level_);
  u_       = cap::ScalarField(w_.size());
  du_      = cap::ScalarField(w_.size());
  for (std::size_t i = 0; i < w_.size(); ++i) {
    du_[i] = w_[i] == 0.0 ? 0.0 : chart_->radius_shift(level_, w_[i]);
    u_[i]  = u_level_ + du_[i];
  }
}

cap::ScalarField GraphState::phi() const {
  cap::ScalarField out(w_.size());
  for (std::size_t i = 0; i < w_.size(); ++i) { out[i] = level_ + w_[i]; }
  return out;
}

std::vector<double> GraphState::slope_field() const {
  std::vector<double> shift(w_.size());
  chart_->slope_shifts(level_, w_.span(), shift);
  const double base = chart_->slope(level_);
  for (double& s : shift) { s += base; }
  return shift;
}

double GraphState::deviation_mean() const {
  double acc   = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    acc += mesh_->weights()[i] * w_[i];
    total += mesh_->weights()[i];
  }
  return acc / total;
}

double CurvatureFields::max_umbilic_deviation() const {
  double m = 0.0;
  for (double x : umbilic) { m = std::max(m, std::abs(x)); }
  return m;
}

double CurvatureFields::min_principal() const {
  double m = std::numeric_limits<double>::infinity();
  for (double x : principal) { m = std::min(m, x); }
  return m;
}

namespace {

struct NodeGeometry {
  cap::LocalJet local;
  std::vector<double> hess;   // covariant Hessian of w
  std::vector<double> upper;  // sigma~^{ij}
  std::vector<double> sigma;  // diagonal of sigma
  double grad_sq = 0.0;
  double v       = 1.0;
};

NodeGeometry node_geometry(const cap::CapMesh& mesh, const cap::Jet& jet, std::size_t node) {
  NodeGeometry g;
  const int k = mesh.row_of(node);
  g.local     = cap::local_jet(mesh, jet, node);
  g.hess      = cap::covariant_hessian(mesh, k, g.local);
  g.upper     = cap::sigma_tilde_upper(mesh, k, g.local);
  g.sigma     = mesh.metric_diagonal(k);
  for (int i = 0; i < mesh.dim(); ++i) { g.grad_sq += g.local.grad[i] * g.local.grad[i] / g.sigma[i]; }
  g.v = std::sqrt(1.0 + g.grad_sq);
  return g;
}

// (sigma~ Hess)^i_j
std::vector<double> raised_hessian(const NodeGeometry& g, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) { s += g.upper[i * n + l] * g.hess[l * n + j]; }
      out[i * n + j] = s;
    }
  }
  return out;
}

void principal_values(const double* m, int n, std::size_t node, double* out) {
  if (n == 2) {
    const double half_trace = 0.5 * (m[0] + m[3]);
    const double det        = m[0] * m[3] - m[1] * m[2];
    const double gap        = 0.5 * (m[0] - m[3]);
    double disc             = gap * gap + m[1] * m[2];
    const double scale      = half_trace * half_trace + std::abs(det);
    if (disc < 0.0) {
      if (disc < -1e-10 * scale) {
        throw NumericError(fmt::format("complex principal curvatures at node {}", node));
      }
      disc = 0.0;
    }
    const double root = std::sqrt(disc);
    out[0]            = half_trace - root;
    out[1]            = half_trace + root;
    return;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && m[i * n + j] != 0.0) {
        throw NumericError(
            fmt::format("shape operator at node {} is not diagonal in dimension {}", node, n));
      }
    }
    out[i] = m[i * n + i];
  }
  std::sort(out, out + n);
}

}  // namespace

cap::ScalarField tilt(const GraphState& state) {
  const auto& mesh = state.mesh();
  const auto g     = cap::grad(mesh, state.deviation());
  cap::ScalarField v(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) { v[i] = std::sqrt(1.0 + g.norm_sq[i]); }
  return v;
}

std::pair<std::vector<double>, std::vector<double>> induced_metric(const GraphState& state) {
  const auto& mesh = state.mesh();
  const int n      = mesh.dim();
  const auto jet   = cap::jet(mesh, state.deviation().span());
  std::vector<double> lower(mesh.size() * n * n), upper(mesh.size() * n * n);
  for (std::size_t node = 0; node < mesh.size(); ++node) {
    const auto g      = node_geometry(mesh, jet, node);
    const double lam  = warp::eval(state.warp(), state.u()[node]).lambda;
    const double lam2 = lam * lam;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double sigma_ij = i == j ? g.sigma[i] : 0.0;
        lower[node * n * n + i * n + j] =
            lam2 * (sigma_ij + g.local.grad[i] * g.local.grad[j]);
        upper[node * n * n + i * n + j] = g.upper[i * n + j] / lam2;
      }
    }
  }
  return {std::move(lower), std::move(upper)};
}

std::vector<double> second_fundamental_form(const GraphState& state) {
  const auto& mesh = state.mesh();
  const int n      = mesh.dim();
  const auto jet   = cap::jet(mesh, state.deviation().span());
  const auto slope = state.slope_field();
  std::vector<double> out(mesh.size() * n * n);
  for (std::size_t node = 0; node < mesh.size(); ++node) {
    const auto g     = node_geometry(mesh, jet, node);
    const double lam = warp::eval(state.warp(), state.u()[node]).lambda;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double sigma_ij = i == j ? g.sigma[i] : 0.0;
        out[node * n * n + i * n + j] =
            lam / g.v *
            (slope[node] * (sigma_ij + g.local.grad[i] * g.local.grad[j]) - g.hess[i * n + j]);
      }
    }
  }
  return out;
}

CurvatureFields shape_operator(const GraphState& state) {
  const auto& mesh = state.mesh();
  const int n      = mesh.dim();
  const std::size_t block = static_cast<std::size_t>(n) * n;
  const auto jet   = cap::jet(mesh, state.deviation().span());
  const auto slope = state.slope_field();
  auto [lower, upper] = induced_metric(state);

  CurvatureFields out;
  out.dim     = n;
  out.v       = cap::ScalarField(mesh.size());
  out.H       = cap::ScalarField(mesh.size());
  out.g_lower = std::move(lower);
  out.g_upper = std::move(upper);
  out.shape.resize(mesh.size() * block);
  out.shape_on.resize(mesh.size() * block);
  out.umbilic.resize(mesh.size() * block);
  out.principal.resize(mesh.size() * n);

  for (std::size_t node = 0; node < mesh.size(); ++node) {
    const auto g      = node_geometry(mesh, jet, node);
    const auto raised = raised_hessian(g, n);
    const double lam  = warp::eval(state.warp(), state.u()[node]).lambda;
    const double lp   = slope[node];
    // 1/v - 1 without cancellation
    const double tilt_defect = -g.grad_sq / (g.v * (1.0 + g.v));
    out.v[node]              = g.v;
    double trace             = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double delta = i == j ? 1.0 : 0.0;
        const double h     = (lp * delta - raised[i * n + j]) / (lam * g.v);
        const double frame = std::sqrt(g.sigma[i] / g.sigma[j]);
        out.shape[node * block + i * n + j]    = h;
        out.shape_on[node * block + i * n + j] = h * frame;
        out.umbilic[node * block + i * n + j] =
            (tilt_defect * delta - raised[i * n + j] / (lp * g.v)) * frame;
      }
      trace += out.shape[node * block + i * n + i];
    }
    out.H[node] = trace;
    principal_values(&out.shape_on[node * block], n, node, &out.principal[node * n]);
  }
  return out;
}

cap::ScalarField mean_curvature(const GraphState& state) {
  const auto& mesh     = state.mesh();
  const auto slope     = state.slope_field();
  const auto contracted = cap::sigma_tilde_contraction(mesh, state.deviation());
  const auto v         = tilt(state);
  cap::ScalarField H(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double lam = warp::eval(state.warp(), state.u()[i]).lambda;
    H[i]             = (mesh.dim() * slope[i] - contracted[i]) / (lam * v[i]);
  }
  return H;
}

}  // namespace imcf::graph
