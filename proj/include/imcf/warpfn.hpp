#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace imcf::warp {

/// Closed interval [lo, hi]; hi is +inf for the catalog warps.
struct Interval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double r) const { return r >= lo && r <= hi; }
  /// I° removes the finite lower endpoint only.
  bool contains_interior(double r) const { return r > lo && r <= hi; }
};

enum class Family { euclidean, hyperboloidal, tabulated, custom };

/// Warping function lambda of the ambient metric dr^2 + lambda(r)^2 g_{S^n}, together with the
/// hypothesis constants (alpha, C) and the base point c of phi = int_c^u ds / lambda(s).
///
/// Immutable after construction; share through std::shared_ptr<const WarpSpec>.
struct WarpSpec {
  std::string name;
  Family family = Family::custom;
  double scale = 0.0;  // the parameter a of the hyperboloidal family
  std::function<double(double)> lambda;
  std::function<double(double)> dlambda;
  std::function<double(double)> ddlambda;
  Interval interval;
  double alpha = 1.0;
  double c_bound = 1.0;
  double base_point = 1.0;
};

struct WarpValues {
  double lambda;
  double dlambda;
  double ddlambda;
};

/// lambda(r) = r on [0, inf).
WarpSpec euclidean(double alpha = 1.0, double c_bound = 1.0, double base_point = 1.0);

/// lambda(r) = sqrt(r^2 + a^2) on [0, inf). A negative c_bound selects the tight constant
/// max(1, a^alpha).
WarpSpec hyperboloidal(double a, double alpha = 1.0, double c_bound = -1.0,
                       double base_point = 0.0);

/// Natural cubic spline through (r, lambda) samples; the interval is the sample range.
WarpSpec tabulated(std::vector<std::pair<double, double>> samples, double alpha, double c_bound,
                   double base_point);

/// Throws DomainError for r outside the interval.
WarpValues eval(const WarpSpec& spec, double r);

struct SamplingOptions {
  double offset = 1e-6;   // first sample at r_min + offset
  double horizon = 1e4;   // last sample (clamped to the interval)
};

struct HypothesisCheck {
  std::string name;
  bool pass = true;
  double observed_min = 0.0;
  double observed_max = 0.0;
  double worst_r = 0.0;      // where the worst value (or first violation) sits
  double worst_value = 0.0;
};

/// Sampled verification of lambda > 0, 0 < lambda' <= C, 0 <= lambda^{1+alpha} lambda'' <= C and
/// of the supplied derivatives against centered differences.
struct ConditionReport {
  std::vector<HypothesisCheck> checks;
  double sample_lo = 0.0;
  double sample_hi = 0.0;
  int sample_count = 0;

  bool pass() const;
  const HypothesisCheck& check(const std::string& name) const;
  /// Observed sup of lambda'.
  double sup_slope() const { return check("slope").observed_max; }
  /// Observed sup of lambda^{1+alpha} lambda''.
  double sup_curvature_product() const { return check("curvature").observed_max; }
};

ConditionReport validate(const WarpSpec& spec, int sample_count = 4096,
                         const SamplingOptions& options = {});

/// int_c^u ds / lambda(s) by adaptive Simpson (absolute tolerance 1e-12).
double phi_from_u(const WarpSpec& spec, double u);
/// Inverse of phi_from_u by bracketed, safeguarded Newton iteration.
double u_from_phi(const WarpSpec& spec, double phi);

/// Adaptive Simpson quadrature with Richardson correction.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tolerance, int max_depth = 50);

/// Fast, cancellation-free access to the radial substitution u <-> phi used inside the flow.
///
/// Besides u(phi) it evaluates the increments lambda'(u(phi + w)) - lambda'(u(phi)) and
/// u(phi + w) - u(phi) with relative accuracy in w, so deviations from a spherical level stay
/// resolved far below the rounding unit of phi itself. Catalog warps use closed forms; other
/// warps use a dense Hermite table built from phi_from_u.
class RadialChart {
 public:
  virtual ~RadialChart() = default;

  const WarpSpec& warp() const { return *warp_; }
  std::shared_ptr<const WarpSpec> warp_ptr() const { return warp_; }

  virtual double u(double phi) const = 0;
  virtual double phi(double u) const = 0;
  /// lambda'(u(phi)).
  virtual double slope(double phi) const = 0;
  /// lambda'(u(phi + w)) - lambda'(u(phi)).
  virtual double slope_shift(double phi, double w) const = 0;
  /// u(phi + w) - u(phi).
  virtual double radius_shift(double phi, double w) const = 0;
  /// Range of phi over which u stays in I°.
  virtual std::pair<double, double> phi_range() const = 0;

  /// out[k] = lambda'(u(level + w[k])) - lambda'(u(level)).
  virtual void slope_shifts(double level, std::span<const double> w, std::span<double> out) const;

 protected:
  explicit RadialChart(std::shared_ptr<const WarpSpec> warp) : warp_(std::move(warp)) {}

 private:
  std::shared_ptr<const WarpSpec> warp_;
};

std::shared_ptr<const RadialChart> make_chart(std::shared_ptr<const WarpSpec> warp);

}  // namespace imcf::warp
