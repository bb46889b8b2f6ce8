#include "imcf/warpfn.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "imcf/errors.hpp"

namespace imcf::warp {

namespace {

constexpr double kQuadratureTolerance = 1e-12;

// Natural cubic spline through strictly increasing abscissae.
class NaturalSpline {
 public:
  NaturalSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n < 3) { return; }
    // Tridiagonal system for the interior second derivatives (Thomas algorithm).
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      diag[i]  = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i]   = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double lower = x_[i] - x_[i - 1];
      const double w     = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
      if (i == 1) { break; }
    }
  }

  double value(double r) const { return evaluate(r, 0); }
  double first(double r) const { return evaluate(r, 1); }
  double second(double r) const { return evaluate(r, 2); }

 private:
  double evaluate(double r, int order) const {
    const auto it  = std::upper_bound(x_.begin(), x_.end(), r);
    std::size_t i  = static_cast<std::size_t>(std::distance(x_.begin(), it));
    i              = std::clamp<std::size_t>(i, 1, x_.size() - 1);
    const double h = x_[i] - x_[i - 1];
    const double a = (x_[i] - r) / h;
    const double b = (r - x_[i - 1]) / h;
    switch (order) {
      case 0:
        return a * y_[i - 1] + b * y_[i] +
               ((a * a * a - a) * m_[i - 1] + (b * b * b - b) * m_[i]) * h * h / 6.0;
      case 1:
        return (y_[i] - y_[i - 1]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m_[i - 1] +
               (3.0 * b * b - 1.0) / 6.0 * h * m_[i];
      default: return a * m_[i - 1] + b * m_[i];
    }
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tolerance, int depth) {
  const double m     = 0.5 * (a + b);
  const double lm    = 0.5 * (a + m);
  const double rm    = 0.5 * (m + b);
  const double flm   = f(lm);
  const double frm   = f(rm);
  const double left  = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tolerance) { return left + right + delta / 15.0; }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tolerance, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tolerance, depth - 1);
}

void require_positive_lambda(const WarpSpec& spec, double r, const char* what) {
  if (!spec.interval.contains(r)) {
    throw DomainError(fmt::format("{} = {} outside the interval [{}, {}] of warp '{}'", what, r,
                                  spec.interval.lo, spec.interval.hi, spec.name));
  }
  const double lam = spec.lambda(r);
  if (!(lam > 0.0) || !std::isfinite(lam)) {
    throw DomainError(fmt::format("lambda({}) = {} is not positive for warp '{}'", r, lam,
                                  spec.name));
  }
}

// 3-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 3> kGaussNodes   = {0.11270166537925831, 0.5, 0.8872983346207417};
constexpr std::array<double, 3> kGaussWeights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

// --- charts -------------------------------------------------------------------------------------

class EuclideanChart final : public RadialChart {
 public:
  explicit EuclideanChart(std::shared_ptr<const WarpSpec> warp)
      : RadialChart(std::move(warp)), c_(this->warp().base_point) {}

  double u(double phi) const override { return c_ * std::exp(phi); }
  double phi(double u) const override {
    if (!(u > 0.0)) { throw DomainError(fmt::format("u = {} outside I° of euclidean warp", u)); }
    return std::log(u / c_);
  }
  double slope(double) const override { return 1.0; }
  double slope_shift(double, double) const override { return 0.0; }
  double radius_shift(double phi, double w) const override {
    return c_ * std::exp(phi) * std::expm1(w);
  }
  std::pair<double, double> phi_range() const override {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  void slope_shifts(double, std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }

 private:
  double c_;
};

// u = a sinh(s), lambda = a cosh(s), lambda' = tanh(s) with s = phi + asinh(c / a).
class HyperboloidalChart final : public RadialChart {
 public:
  explicit HyperboloidalChart(std::shared_ptr<const WarpSpec> warp)
      : RadialChart(std::move(warp)),
        a_(this->warp().scale),
        offset_(std::asinh(this->warp().base_point / a_)) {}

  double u(double phi) const override { return a_ * std::sinh(phi + offset_); }
  double phi(double u) const override {
    if (!(u > 0.0)) {
      throw DomainError(fmt::format("u = {} outside I° of hyperboloidal warp", u));
    }
    return std::asinh(u / a_) - offset_;
  }
  double slope(double phi) const override { return std::tanh(phi + offset_); }
  double slope_shift(double phi, double w) const override {
    const double s = phi + offset_;
    return shift(std::cosh(s), std::sinh(s), w);
  }
  double radius_shift(double phi, double w) const override {
    return 2.0 * a_ * std::cosh(phi + offset_ + 0.5 * w) * std::sinh(0.5 * w);
  }
  std::pair<double, double> phi_range() const override {
    return {-offset_, std::numeric_limits<double>::infinity()};
  }
  void slope_shifts(double level, std::span<const double> w, std::span<double> out) const override {
    const double s  = level + offset_;
    const double cs = std::cosh(s);
    const double ss = std::sinh(s);
    for (std::size_t k = 0; k < w.size(); ++k) { out[k] = shift(cs, ss, w[k]); }
  }

 private:
  // tanh(s + w) - tanh(s) = sinh(w) / (cosh(s + w) cosh(s)).
  static double shift(double cs, double ss, double w) {
    double sinh_w = 0.0;
    double cosh_w = 0.0;
    if (std::abs(w) < 1e-3) {
      const double w2 = w * w;
      sinh_w          = w * (1.0 + w2 / 6.0 * (1.0 + w2 / 20.0));
      cosh_w          = 1.0 + 0.5 * w2 * (1.0 + w2 / 12.0);
    } else {
      sinh_w = std::sinh(w);
      cosh_w = std::cosh(w);
    }
    return sinh_w / ((cs * cosh_w + ss * sinh_w) * cs);
  }

  double a_;
  double offset_;
};

// Hermite table of u(phi) over a geometric grid in u, for warps without closed forms.
class TableChart final : public RadialChart {
 public:
  explicit TableChart(std::shared_ptr<const WarpSpec> warp) : RadialChart(std::move(warp)) {
    const WarpSpec& spec = this->warp();
    const double lo      = spec.interval.lo + 1e-6 * std::max(1.0, std::abs(spec.interval.lo));
    const double hi      = std::min(spec.interval.hi, std::max(1e4, spec.interval.lo + 1.0));
    constexpr int knots  = 4097;
    const double span    = hi - spec.interval.lo;
    const double first   = lo - spec.interval.lo;
    u_.resize(knots);
    for (int i = 0; i < knots; ++i) {
      const double frac = static_cast<double>(i) / (knots - 1);
      u_[i]             = spec.interval.lo + first * std::pow(span / first, frac);
    }
    u_.back() = hi;
    phi_.resize(knots);
    lam_.resize(knots);
    const auto inv_lambda = [&spec](double s) { return 1.0 / spec.lambda(s); };
    phi_[0]               = phi_from_u(spec, u_[0]);
    for (int i = 0; i < knots; ++i) {
      lam_[i] = spec.lambda(u_[i]);
      if (i > 0) {
        phi_[i] = phi_[i - 1] +
                  adaptive_simpson(inv_lambda, u_[i - 1], u_[i], 1e-3 * kQuadratureTolerance);
      }
    }
  }

  double u(double phi) const override {
    const std::size_t i = segment(phi_, phi);
    return hermite(phi_[i - 1], phi_[i], u_[i - 1], u_[i], lam_[i - 1], lam_[i], phi);
  }
  double phi(double u) const override {
    if (u < u_.front() || u > u_.back()) {
      throw DomainError(fmt::format("u = {} outside the tabulated chart range", u));
    }
    const std::size_t i = segment(u_, u);
    return hermite(u_[i - 1], u_[i], phi_[i - 1], phi_[i], 1.0 / lam_[i - 1], 1.0 / lam_[i], u);
  }
  double slope(double phi) const override { return warp().dlambda(u(phi)); }
  double slope_shift(double phi, double w) const override {
    if (std::abs(w) >= 1e-3) { return slope(phi + w) - slope(phi); }
    double sum = 0.0;
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      const double uq = u(phi + kGaussNodes[q] * w);
      sum += kGaussWeights[q] * warp().ddlambda(uq) * warp().lambda(uq);
    }
    return sum * w;
  }
  double radius_shift(double phi, double w) const override {
    if (std::abs(w) >= 1e-3) { return u(phi + w) - u(phi); }
    double sum = 0.0;
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      sum += kGaussWeights[q] * warp().lambda(u(phi + kGaussNodes[q] * w));
    }
    return sum * w;
  }
  std::pair<double, double> phi_range() const override { return {phi_.front(), phi_.back()}; }

 private:
  static std::size_t segment(const std::vector<double>& knots, double x) {
    if (!(x >= knots.front() && x <= knots.back())) {
      throw DomainError(fmt::format("argument {} outside the tabulated chart range [{}, {}]", x,
                                    knots.front(), knots.back()));
    }
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::distance(knots.begin(), it)), 1,
                                   knots.size() - 1);
  }

  static double hermite(double x0, double x1, double y0, double y1, double d0, double d1,
                        double x) {
    const double h   = x1 - x0;
    const double t   = (x - x0) / h;
    const double t2  = t * t;
    const double t3  = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
  }

  std::vector<double> u_;
  std::vector<double> phi_;
  std::vector<double> lam_;
};

}  // namespace

// --- catalog ------------------------------------------------------------------------------------

WarpSpec euclidean(double alpha, double c_bound, double base_point) {
  WarpSpec spec;
  spec.name       = "euclidean";
  spec.family     = Family::euclidean;
  spec.lambda     = [](double r) { return r; };
  spec.dlambda    = [](double) { return 1.0; };
  spec.ddlambda   = [](double) { return 0.0; };
  spec.interval   = {0.0, std::numeric_limits<double>::infinity()};
  spec.alpha      = alpha;
  spec.c_bound    = c_bound;
  spec.base_point = base_point;
  if (!(base_point > 0.0)) {
    throw ConfigError(fmt::format("euclidean base point must be positive, got {}", base_point));
  }
  return spec;
}

WarpSpec hyperboloidal(double a, double alpha, double c_bound, double base_point) {
  if (!(a > 0.0)) { throw ConfigError(fmt::format("hyperboloidal a must be positive, got {}", a)); }
  if (!(base_point >= 0.0)) {
    throw ConfigError(fmt::format("hyperboloidal base point must be >= 0, got {}", base_point));
  }
  WarpSpec spec;
  spec.name     = "hyperboloidal";
  spec.family   = Family::hyperboloidal;
  spec.scale    = a;
  const double a2 = a * a;
  spec.lambda   = [a2](double r) { return std::sqrt(r * r + a2); };
  spec.dlambda  = [a2](double r) { return r / std::sqrt(r * r + a2); };
  spec.ddlambda = [a2](double r) {
    const double q = r * r + a2;
    return a2 / (q * std::sqrt(q));
  };
  spec.interval   = {0.0, std::numeric_limits<double>::infinity()};
  spec.alpha      = alpha;
  spec.c_bound    = c_bound > 0.0 ? c_bound : std::max(1.0, std::pow(a, alpha));
  spec.base_point = base_point;
  return spec;
}

WarpSpec tabulated(std::vector<std::pair<double, double>> samples, double alpha, double c_bound,
                   double base_point) {
  if (samples.size() < 4) {
    throw ConfigError(fmt::format("tabulated warp needs at least 4 samples, got {}",
                                  samples.size()));
  }
  std::vector<double> r, lam;
  for (const auto& [ri, li] : samples) {
    if (!r.empty() && !(ri > r.back())) {
      throw ConfigError("tabulated warp samples must have strictly increasing r");
    }
    r.push_back(ri);
    lam.push_back(li);
  }
  auto spline     = std::make_shared<const NaturalSpline>(r, lam);
  WarpSpec spec;
  spec.name       = "tabulated";
  spec.family     = Family::tabulated;
  spec.lambda     = [spline](double x) { return spline->value(x); };
  spec.dlambda    = [spline](double x) { return spline->first(x); };
  spec.ddlambda   = [spline](double x) { return spline->second(x); };
  spec.interval   = {r.front(), r.back()};
  spec.alpha      = alpha;
  spec.c_bound    = c_bound;
  spec.base_point = base_point;
  if (!spec.interval.contains(base_point)) {
    throw ConfigError(fmt::format("base point {} outside tabulated range [{}, {}]", base_point,
                                  r.front(), r.back()));
  }
  return spec;
}

WarpValues eval(const WarpSpec& spec, double r) {
  if (!spec.interval.contains(r)) {
    throw DomainError(fmt::format("r = {} outside the interval [{}, {}] of warp '{}'", r,
                                  spec.interval.lo, spec.interval.hi, spec.name));
  }
  return {spec.lambda(r), spec.dlambda(r), spec.ddlambda(r)};
}

// --- validation ---------------------------------------------------------------------------------

bool ConditionReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const HypothesisCheck& ConditionReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) { return c; }
  }
  throw std::out_of_range("no hypothesis check named " + name);
}

namespace {

// Tracks min/max of a sampled quantity and the worst violation of [lower, upper].
struct Tracker {
  HypothesisCheck result;
  double lower;
  double upper;
  bool lower_strict;
  double worst_violation = 0.0;
  bool first             = true;

  Tracker(std::string name, double lo, double hi, bool strict)
      : lower(lo), upper(hi), lower_strict(strict) {
    result.name = std::move(name);
  }

  void add(double r, double value) {
    if (first || value < result.observed_min) { result.observed_min = value; }
    if (first || value > result.observed_max || std::isnan(value)) {
      result.observed_max = value;
      if (result.pass) {
        result.worst_r     = r;
        result.worst_value = value;
      }
    }
    first = false;
    double violation = 0.0;
    if (!std::isfinite(value)) {
      violation = std::numeric_limits<double>::infinity();
    } else if (value > upper) {
      violation = value - upper;
    } else if (value < lower || (lower_strict && value <= lower)) {
      violation = std::max(lower - value, std::numeric_limits<double>::min());
    }
    if (violation > 0.0 && (result.pass || violation > worst_violation)) {
      result.pass        = false;
      worst_violation    = violation;
      result.worst_r     = r;
      result.worst_value = value;
    }
  }
};

}  // namespace

ConditionReport validate(const WarpSpec& spec, int sample_count, const SamplingOptions& options) {
  if (sample_count < 2) { throw ConfigError("validate needs at least 2 samples"); }
  const double lo    = spec.interval.lo;
  const double hi    = std::min(spec.interval.hi, options.horizon);
  const double first = options.offset;
  const double span  = hi - lo;
  if (!(span > first)) {
    throw ConfigError(fmt::format("sampling horizon {} does not exceed r_min + offset", hi));
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  Tracker positivity("positivity", 0.0, inf, true);
  Tracker slope("slope", 0.0, spec.c_bound, true);
  Tracker curvature("curvature", 0.0, spec.c_bound, false);
  Tracker consistency("derivative-consistency", 0.0, 1.0, false);

  for (int i = 0; i < sample_count; ++i) {
    const double frac = static_cast<double>(i) / (sample_count - 1);
    const double r    = (i + 1 == sample_count) ? hi : lo + first * std::pow(span / first, frac);
    const double lam  = spec.lambda(r);
    const double dl   = spec.dlambda(r);
    const double ddl  = spec.ddlambda(r);
    positivity.add(r, lam);
    slope.add(r, dl);
    curvature.add(r, std::pow(lam, 1.0 + spec.alpha) * ddl);

    // Centered differences; the step stays inside the interval.
    double step = 1e-4 * std::max(1.0, std::abs(r));
    step        = std::min(step, 0.5 * (r - lo));
    if (std::isfinite(spec.interval.hi)) { step = std::min(step, 0.5 * (spec.interval.hi - r)); }
    if (step > 0.0) {
      const double lp     = spec.lambda(r + step);
      const double lm     = spec.lambda(r - step);
      const double fd1    = (lp - lm) / (2.0 * step);
      const double fd2    = (lp - 2.0 * lam + lm) / (step * step);
      const double round1 = 1e-13 * std::abs(lam) / step;
      const double round2 = 1e-13 * std::abs(lam) / (step * step);
      const double e1     = std::abs(fd1 - dl) / (1e-5 * (1.0 + std::abs(dl)) + round1);
      const double e2     = std::abs(fd2 - ddl) / (1e-5 * (1.0 + std::abs(ddl)) + round2);
      consistency.add(r, std::max(e1, e2));
    }
  }

  ConditionReport report;
  report.sample_lo    = lo + first;
  report.sample_hi    = hi;
  report.sample_count = sample_count;
  report.checks       = {positivity.result, slope.result, curvature.result, consistency.result};
  return report;
}

// --- radial substitution ------------------------------------------------------------------------

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tolerance, int max_depth) {
  if (a == b) { return 0.0; }
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tolerance, max_depth);
}

double phi_from_u(const WarpSpec& spec, double u) {
  require_positive_lambda(spec, u, "u");
  require_positive_lambda(spec, spec.base_point, "base point");
  const auto integrand = [&spec](double s) { return 1.0 / spec.lambda(s); };
  return adaptive_simpson(integrand, spec.base_point, u, kQuadratureTolerance);
}

double u_from_phi(const WarpSpec& spec, double phi) {
  if (!std::isfinite(phi)) { throw DomainError("phi must be finite"); }
  const double c = spec.base_point;
  if (phi == 0.0) { return c; }
  const auto residual = [&](double u) { return phi_from_u(spec, u) - phi; };

  double lo = c;
  double hi = c;
  if (phi > 0.0) {
    double step = std::max(1.0, std::abs(c));
    for (int it = 0;; ++it) {
      hi = std::min(c + step, spec.interval.hi);
      if (residual(hi) >= 0.0) { break; }
      if (hi == spec.interval.hi) {
        throw DomainError(fmt::format("phi = {} above the image of warp '{}'", phi, spec.name));
      }
      if (it > 200) { throw NumericError("u_from_phi: upper bracket search failed"); }
      lo = hi;
      step *= 2.0;
    }
  } else {
    const double edge = spec.interval.lo;
    if (spec.lambda(edge) > 0.0) {
      lo = edge;
      if (residual(lo) > 0.0) {
        throw DomainError(fmt::format("phi = {} below the image of warp '{}'", phi, spec.name));
      }
    } else {
      for (int it = 0;; ++it) {
        lo = edge + 0.5 * (lo - edge);
        if (residual(lo) <= 0.0) { break; }
        if (it > 1000 || lo == edge) {
          throw DomainError(fmt::format("phi = {} below the image of warp '{}'", phi, spec.name));
        }
        hi = lo;
      }
    }
  }

  // Safeguarded Newton: d(phi)/du = 1 / lambda(u).
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = residual(u);
    if (f == 0.0) { return u; }
    if (f > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    double next = u - f * spec.lambda(u);
    if (!(next > lo && next < hi)) { next = 0.5 * (lo + hi); }
    if (std::abs(next - u) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(u) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(u)) {
      return next;
    }
    u = next;
  }
  throw NumericError(fmt::format("u_from_phi did not converge for phi = {}", phi));
}

void RadialChart::slope_shifts(double level, std::span<const double> w,
                               std::span<double> out) const {
  for (std::size_t k = 0; k < w.size(); ++k) { out[k] = slope_shift(level, w[k]); }
}

std::shared_ptr<const RadialChart> make_chart(std::shared_ptr<const WarpSpec> warp) {
  switch (warp->family) {
    case Family::euclidean: return std::make_shared<EuclideanChart>(std::move(warp));
    case Family::hyperboloidal: return std::make_shared<HyperboloidalChart>(std::move(warp));
    default: return std::make_shared<TableChart>(std::move(warp));
  }
}

}  // namespace imcf::warp
