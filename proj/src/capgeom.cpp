#include "imcf/capgeom.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "imcf/errors.hpp"

namespace imcf::cap {

std::string to_string(Mode mode) { return mode == Mode::axisym ? "axisym" : "full2d"; }

Mode parse_mode(const std::string& text) {
  if (text == "axisym") { return Mode::axisym; }
  if (text == "full2d") { return Mode::full2d; }
  throw ConfigError(fmt::format("unknown mesh mode '{}' (expected axisym or full2d)", text));
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max_abs() const {
  double m = 0.0;
  for (double x : values_) { m = std::max(m, std::abs(x)); }
  return m;
}

double unit_sphere_area(int m) {
  const double half = 0.5 * (m + 1);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGlNodes   = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                              0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

double sine_power_integral(double a, double b, int power) {
  const double mid  = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum        = 0.0;
  for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
    sum += kGlWeights[q] * std::pow(std::sin(mid + half * kGlNodes[q]), power);
  }
  return sum * half;
}

}  // namespace

CapMesh build_mesh(int dim_n, double theta0, Mode mode, int n_theta, int n_psi) {
  if (dim_n < 2) { throw ConfigError(fmt::format("dimension n must be >= 2, got {}", dim_n)); }
  if (!(theta0 > 0.0 && theta0 <= 0.5 * std::numbers::pi + 1e-12)) {
    throw ConfigError(fmt::format("theta0 must lie in (0, pi/2], got {}", theta0));
  }
  if (n_theta < 4) { throw ConfigError(fmt::format("n_theta must be >= 4, got {}", n_theta)); }
  if (mode == Mode::axisym && n_psi != 1) {
    throw ConfigError(fmt::format("axisym mode requires n_psi = 1, got {}", n_psi));
  }
  if (mode == Mode::full2d) {
    if (dim_n != 2) { throw ConfigError("full2d mode requires n = 2"); }
    if (n_psi < 8 || n_psi % 2 != 0) {
      throw ConfigError(fmt::format("full2d mode requires an even n_psi >= 8, got {}", n_psi));
    }
  }

  CapMesh mesh;
  mesh.dim_     = dim_n;
  mesh.theta0_  = theta0;
  mesh.mode_    = mode;
  mesh.n_theta_ = n_theta;
  mesh.n_psi_   = n_psi;
  mesh.h_theta_ = theta0 / (n_theta - 0.5);
  mesh.h_psi_   = 2.0 * std::numbers::pi / n_psi;

  mesh.theta_.resize(n_theta);
  mesh.sin_.resize(n_theta);
  mesh.cos_.resize(n_theta);
  for (int k = 0; k < n_theta; ++k) {
    mesh.theta_[k] = (k + 0.5) * mesh.h_theta_;
    mesh.sin_[k]   = std::sin(mesh.theta_[k]);
    mesh.cos_[k]   = std::cos(mesh.theta_[k]);
  }
  mesh.theta_.back() = theta0;
  mesh.sin_.back()   = std::sin(theta0);
  mesh.cos_.back()   = std::cos(theta0);

  // Row k owns the cell [k h, (k + 1) h], the last row the half cell ending at theta0.
  const double fiber = mode == Mode::axisym ? unit_sphere_area(dim_n - 1) : mesh.h_psi_;
  std::vector<double> row_weight(n_theta);
  for (int k = 0; k < n_theta; ++k) {
    const double a = k * mesh.h_theta_;
    const double b = std::min((k + 1) * mesh.h_theta_, theta0);
    row_weight[k]  = fiber * sine_power_integral(a, b, dim_n - 1);
  }
  mesh.weights_.resize(mesh.size());
  for (int j = 0; j < n_psi; ++j) {
    for (int k = 0; k < n_theta; ++k) { mesh.weights_[mesh.index(k, j)] = row_weight[k]; }
  }
  return mesh;
}

std::vector<double> CapMesh::metric_diagonal(int k) const {
  std::vector<double> diag(dim_, sin_[k] * sin_[k]);
  diag[0] = 1.0;
  return diag;
}

double CapMesh::christoffel(int k, int i, int j, int l) const {
  // Gamma^theta_{aa} = -sin cos, Gamma^a_{theta a} = Gamma^a_{a theta} = cot; angular
  // coordinates are normal coordinates of the fiber sphere, so the remaining symbols vanish.
  if (i == 0) { return (j == l && j > 0) ? -sin_[k] * cos_[k] : 0.0; }
  if ((j == 0 && l == i) || (l == 0 && j == i)) { return cot_theta(k); }
  return 0.0;
}

namespace {

// Theta derivatives of one column; ghost is the value mirrored across the pole.
void theta_derivatives(std::span<const double> col, double ghost, double h, double* first,
                       double* second) {
  const std::size_t n = col.size();
  const double inv2h  = 0.5 / h;
  const double invh2  = 1.0 / (h * h);
  first[0]            = (col[1] - ghost) * inv2h;
  if (second != nullptr) { second[0] = (col[1] - 2.0 * col[0] + ghost) * invh2; }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    first[k] = (col[k + 1] - col[k - 1]) * inv2h;
    if (second != nullptr) { second[k] = (col[k + 1] - 2.0 * col[k] + col[k - 1]) * invh2; }
  }
  const std::size_t b = n - 1;
  first[b]            = (3.0 * (col[b] - col[b - 1]) - (col[b - 1] - col[b - 2])) * inv2h;
  if (second != nullptr) {
    second[b] = (2.0 * (col[b] - col[b - 1]) - 3.0 * (col[b - 1] - col[b - 2]) + (col[b - 2] - col[b - 3])) * invh2;
  }
}

}  // namespace

Jet jet(const CapMesh& mesh, std::span<const double> f) {
  const std::size_t size = mesh.size();
  if (f.size() != size) {
    throw ConfigError(fmt::format("field has {} values, mesh has {} nodes", f.size(), size));
  }
  const int nt = mesh.n_theta();
  const int np = mesh.n_psi();
  const double h = mesh.h_theta();

  Jet out;
  out.d_theta.resize(size);
  out.d_theta_theta.resize(size);
  for (int j = 0; j < np; ++j) {
    const std::size_t base  = mesh.index(0, j);
    const double ghost      = f[mesh.index(0, mesh.antipodal_column(j))];
    theta_derivatives(f.subspan(base, nt), ghost, h, &out.d_theta[base], &out.d_theta_theta[base]);
  }
  if (!mesh.periodic()) { return out; }

  const double hp    = mesh.h_psi();
  const double inv2p = 0.5 / hp;
  const double invp2 = 1.0 / (hp * hp);
  out.d_psi.resize(size);
  out.d_psi_psi.resize(size);
  out.d_theta_psi.resize(size);
  for (int j = 0; j < np; ++j) {
    const int jp = (j + 1) % np;
    const int jm = (j + np - 1) % np;
    for (int k = 0; k < nt; ++k) {
      const double fp = f[mesh.index(k, jp)];
      const double fm = f[mesh.index(k, jm)];
      const double fc = f[mesh.index(k, j)];
      out.d_psi[mesh.index(k, j)]     = (fp - fm) * inv2p;
      out.d_psi_psi[mesh.index(k, j)] = (fp - 2.0 * fc + fm) * invp2;
    }
  }
  for (int j = 0; j < np; ++j) {
    const std::size_t base = mesh.index(0, j);
    const double ghost     = out.d_psi[mesh.index(0, mesh.antipodal_column(j))];
    theta_derivatives(std::span<const double>(out.d_psi).subspan(base, nt), ghost, h,
                      &out.d_theta_psi[base], nullptr);
  }
  return out;
}

Gradient grad(const CapMesh& mesh, const ScalarField& f) {
  Jet derivatives = jet(mesh, f.span());
  Gradient g;
  g.norm_sq = ScalarField(mesh.size());
  for (std::size_t node = 0; node < mesh.size(); ++node) {
    double norm = derivatives.d_theta[node] * derivatives.d_theta[node];
    if (mesh.periodic()) {
      const double s = mesh.sin_theta(mesh.row_of(node));
      norm += derivatives.d_psi[node] * derivatives.d_psi[node] / (s * s);
    }
    g.norm_sq[node] = norm;
  }
  g.d_theta = std::move(derivatives.d_theta);
  g.d_psi   = std::move(derivatives.d_psi);
  return g;
}

ScalarField sigma_tilde_contraction(const CapMesh& mesh, const ScalarField& f) {
  const Jet d = jet(mesh, f.span());
  ScalarField out(mesh.size());
  const double fiber_dim = mesh.dim() - 1;
  for (std::size_t node = 0; node < mesh.size(); ++node) {
    const int k = mesh.row_of(node);
    if (!mesh.periodic()) {
      // Axisymmetric reduction: f_tt / v^2 + (n - 1) cot(theta) f_t.
      const double ft = d.d_theta[node];
      out[node]       = d.d_theta_theta[node] / (1.0 + ft * ft) + fiber_dim * mesh.cot_theta(k) * ft;
    } else {
      out[node] = tensor_contraction(mesh, k, local_jet(mesh, d, node));
    }
  }
  return out;
}

LocalJet local_jet(const CapMesh& mesh, const Jet& d, std::size_t node) {
  const int n = mesh.dim();
  LocalJet local;
  local.grad.assign(n, 0.0);
  local.hessian.assign(static_cast<std::size_t>(n) * n, 0.0);
  local.grad[0]    = d.d_theta[node];
  local.hessian[0] = d.d_theta_theta[node];
  if (mesh.periodic()) {
    local.grad[1]    = d.d_psi[node];
    local.hessian[1] = d.d_theta_psi[node];
    local.hessian[2] = d.d_theta_psi[node];
    local.hessian[3] = d.d_psi_psi[node];
  }
  return local;
}

std::vector<double> covariant_hessian(const CapMesh& mesh, int k, const LocalJet& local) {
  const int n = mesh.dim();
  std::vector<double> hess(local.hessian);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double correction = 0.0;
      for (int l = 0; l < n; ++l) { correction += mesh.christoffel(k, l, i, j) * local.grad[l]; }
      hess[i * n + j] -= correction;
    }
  }
  return hess;
}

std::vector<double> sigma_tilde_upper(const CapMesh& mesh, int k, const LocalJet& local) {
  const int n           = mesh.dim();
  const auto sigma_diag = mesh.metric_diagonal(k);
  std::vector<double> raised(n);
  double norm_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    raised[i] = local.grad[i] / sigma_diag[i];
    norm_sq += raised[i] * local.grad[i];
  }
  const double v2 = 1.0 + norm_sq;
  std::vector<double> upper(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      upper[i * n + j] = (i == j ? 1.0 / sigma_diag[i] : 0.0) - raised[i] * raised[j] / v2;
    }
  }
  return upper;
}

double tensor_contraction(const CapMesh& mesh, int k, const LocalJet& local) {
  const auto hess  = covariant_hessian(mesh, k, local);
  const auto upper = sigma_tilde_upper(mesh, k, local);
  double sum       = 0.0;
  for (std::size_t i = 0; i < hess.size(); ++i) { sum += upper[i] * hess[i]; }
  return sum;
}

std::vector<double> boundary_normal_derivative(const CapMesh& mesh, const ScalarField& f) {
  const int b = mesh.n_theta() - 1;
  const double inv2h = 0.5 / mesh.h_theta();
  std::vector<double> out(mesh.n_psi());
  for (int j = 0; j < mesh.n_psi(); ++j) {
    const double f0 = f[mesh.index(b, j)], f1 = f[mesh.index(b - 1, j)], f2 = f[mesh.index(b - 2, j)];
    out[j]          = (3.0 * (f0 - f1) - (f1 - f2)) * inv2h;
  }
  return out;
}

double integrate(const CapMesh& mesh, const ScalarField& f) {
  const auto& w = mesh.weights();
  double sum    = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) { sum += w[i] * f[i]; }
  return sum;
}

}  // namespace imcf::cap
