#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace imcf::cap {

enum class Mode { axisym, full2d };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// One real value per mesh node. Node (k, j) sits at index j * n_theta + k.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(std::size_t size, double value = 0.0) : values_(size, value) {}
  explicit ScalarField(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const;
  double max() const;
  double min() const;
  double max_abs() const;

 private:
  std::vector<double> values_;
};

/// Geodesic cap {theta <= theta0} of the round S^n.
///
/// Polar rows are staggered off the pole: theta_k = (k + 1/2) h with h = theta0 / (n_theta - 1/2),
/// so the last row lies on the boundary theta = theta0 and no node sits at theta = 0. In axisym
/// mode fields depend on theta only and the n - 1 angular directions are represented by normal
/// coordinates of S^{n-1} at the node, giving sigma = diag(1, sin^2, ..., sin^2). In full2d mode
/// (n = 2) the second coordinate is the periodic azimuth psi.
class CapMesh {
 public:
  int dim() const { return dim_; }
  double theta0() const { return theta0_; }
  Mode mode() const { return mode_; }
  int n_theta() const { return n_theta_; }
  int n_psi() const { return n_psi_; }
  std::size_t size() const { return static_cast<std::size_t>(n_theta_) * n_psi_; }
  double h_theta() const { return h_theta_; }
  double h_psi() const { return h_psi_; }

  std::size_t index(int k, int j) const { return static_cast<std::size_t>(j) * n_theta_ + k; }
  int row_of(std::size_t node) const { return static_cast<int>(node % n_theta_); }
  int column_of(std::size_t node) const { return static_cast<int>(node / n_theta_); }
  double theta(int k) const { return theta_[k]; }
  double psi(int j) const { return j * h_psi_; }
  double sin_theta(int k) const { return sin_[k]; }
  double cos_theta(int k) const { return cos_[k]; }
  double cot_theta(int k) const { return cos_[k] / sin_[k]; }

  bool is_boundary_row(int k) const { return k == n_theta_ - 1; }
  bool is_pole_row(int k) const { return k == 0; }
  /// Column holding the mirror image across the pole (psi + pi).
  int antipodal_column(int j) const { return (j + n_psi_ / 2) % n_psi_; }
  bool periodic() const { return mode_ == Mode::full2d; }

  /// Quadrature weights for int_M f dsigma.
  const std::vector<double>& weights() const { return weights_; }

  /// Diagonal of sigma_ij in the node's coordinates (theta first).
  std::vector<double> metric_diagonal(int k) const;
  /// Christoffel symbol Gamma^i_{jl} of the round metric in the node's coordinates.
  double christoffel(int k, int i, int j, int l) const;

 private:
  friend CapMesh build_mesh(int, double, Mode, int, int);

  int dim_       = 2;
  double theta0_ = 0.0;
  Mode mode_     = Mode::axisym;
  int n_theta_   = 0;
  int n_psi_     = 1;
  double h_theta_ = 0.0;
  double h_psi_   = 0.0;
  std::vector<double> theta_, sin_, cos_;
  std::vector<double> weights_;
};

/// Throws ConfigError on invalid parameters.
CapMesh build_mesh(int dim_n, double theta0, Mode mode, int n_theta, int n_psi = 1);

/// Coordinate partial derivatives of a field at every node. Interior rows use centered
/// differences; the pole row reflects across theta = 0; the boundary row uses one-sided
/// second-order differences in theta. Psi derivatives (full2d only) are periodic centered.
struct Jet {
  std::vector<double> d_theta, d_psi;
  std::vector<double> d_theta_theta, d_theta_psi, d_psi_psi;
};

Jet jet(const CapMesh& mesh, std::span<const double> f);

struct Gradient {
  std::vector<double> d_theta;
  std::vector<double> d_psi;  // empty in axisym mode
  ScalarField norm_sq;        // |grad f|^2_sigma
};

Gradient grad(const CapMesh& mesh, const ScalarField& f);

/// sigma~^{ij} f_{i,j} with sigma~^{ij} = sigma^{ij} - f^i f^j / v^2 and v^2 = 1 + |grad f|^2.
ScalarField sigma_tilde_contraction(const CapMesh& mesh, const ScalarField& f);

/// Node-local tensor algebra shared by the curvature routines and used as an independent check of
/// the reduced axisymmetric formulas.
struct LocalJet {
  std::vector<double> grad;     // dim entries, coordinate partials
  std::vector<double> hessian;  // dim*dim entries, coordinate second partials
};

/// Extracts the local jet of node (k, j) from a Jet.
LocalJet local_jet(const CapMesh& mesh, const Jet& jet, std::size_t node);

/// Covariant Hessian f_{i,j} = d_i d_j f - Gamma^l_{ij} d_l f (row-major dim x dim).
std::vector<double> covariant_hessian(const CapMesh& mesh, int k, const LocalJet& local);

/// Contravariant sigma~^{ij} (row-major dim x dim).
std::vector<double> sigma_tilde_upper(const CapMesh& mesh, int k, const LocalJet& local);

/// sigma~^{ij} f_{i,j} via the full tensor route.
double tensor_contraction(const CapMesh& mesh, int k, const LocalJet& local);

/// One-sided second-order d f / d theta at theta = theta0, one value per psi column.
std::vector<double> boundary_normal_derivative(const CapMesh& mesh, const ScalarField& f);

double integrate(const CapMesh& mesh, const ScalarField& f);

/// Surface measure of the unit S^{m}.
double unit_sphere_area(int m);

}  // namespace imcf::cap
