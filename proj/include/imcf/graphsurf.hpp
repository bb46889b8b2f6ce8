#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "imcf/capgeom.hpp"
#include "imcf/warpfn.hpp"

namespace imcf::graph {

/// The graph {(u(x), x)} at one flow time.
///
/// phi is stored as a scalar level plus a deviation field, phi = level + w. Radial data keeps
/// w = 0 exactly, and every geometric quantity depends on derivatives of w only, so deviations far
/// below the rounding unit of phi itself stay resolved. The radius u = u(phi) and the radius
/// deviation u - u(level) are cached.
class GraphState {
 public:
  using MeshPtr  = std::shared_ptr<const cap::CapMesh>;
  using ChartPtr = std::shared_ptr<const warp::RadialChart>;

  /// Builds a state from radius values; throws DomainError if any u leaves I°.
  static GraphState from_radius(MeshPtr mesh, ChartPtr chart, const cap::ScalarField& u,
                                double t = 0.0);
  static GraphState from_phi(MeshPtr mesh, ChartPtr chart, double level,
                             cap::ScalarField deviation, double t = 0.0);

  double t() const { return t_; }
  double level() const { return level_; }
  const cap::ScalarField& deviation() const { return w_; }
  cap::ScalarField phi() const;
  const cap::ScalarField& u() const { return u_; }
  /// u - u(level), computed without cancellation.
  const cap::ScalarField& radius_deviation() const { return du_; }
  double level_radius() const { return u_level_; }

  const cap::CapMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const warp::RadialChart& chart() const { return *chart_; }
  const ChartPtr& chart_ptr() const { return chart_; }
  const warp::WarpSpec& warp() const { return chart_->warp(); }

  /// lambda'(u) per node as slope(level) + slope_shift(level, w).
  std::vector<double> slope_field() const;
  /// Weighted mean of w.
  double deviation_mean() const;

 private:
  GraphState() = default;
  void refresh();

  double t_     = 0.0;
  double level_ = 0.0;
  cap::ScalarField w_;
  cap::ScalarField u_, du_;
  double u_level_ = 0.0;
  MeshPtr mesh_;
  ChartPtr chart_;
};

/// Per-node extrinsic geometry. Tensors are stored row-major, dim*dim entries per node.
struct CurvatureFields {
  int dim = 0;
  cap::ScalarField v;
  std::vector<double> g_lower;    // g_ij in node coordinates
  std::vector<double> g_upper;    // g^ij in node coordinates
  std::vector<double> shape;      // h^i_j in node coordinates
  std::vector<double> shape_on;   // h^i_j in the sigma-orthonormal frame
  std::vector<double> umbilic;    // (lambda / lambda') h^i_j - delta^i_j, sigma-orthonormal frame
  std::vector<double> principal;  // dim ascending values per node
  cap::ScalarField H;             // trace of shape

  std::size_t nodes() const { return v.size(); }
  double max_umbilic_deviation() const;
  double min_principal() const;
};

cap::ScalarField tilt(const GraphState& state);
std::pair<std::vector<double>, std::vector<double>> induced_metric(const GraphState& state);
/// Covariant second fundamental form (lambda / v)(lambda'(sigma_ij + phi_i phi_j) - phi_{i,j}).
std::vector<double> second_fundamental_form(const GraphState& state);
/// Throws NumericError when the principal curvatures cannot be resolved.
CurvatureFields shape_operator(const GraphState& state);
/// H = n lambda' / (lambda v) - sigma~^{ij} phi_{i,j} / (lambda v).
cap::ScalarField mean_curvature(const GraphState& state);

}  // namespace imcf::graph
