#include "imcf/diagnostics.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "imcf/errors.hpp"

namespace imcf::diag {

const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> columns = {
      "t",           "sup_u",    "inf_u",      "sup_phidot",    "inf_phidot",
      "sup_gradphi", "sup_Du",   "area",       "area_ratio",    "osc_uhat",
      "roundness_dev", "neumann_res", "envelope_f"};
  return columns;
}

double default_slack(const flow::Trajectory& traj) {
  const double h = traj.front().state.mesh().h_theta();
  return 10.0 * h * h;
}

std::vector<SeriesRow> series(const flow::Trajectory& traj) {
  std::vector<SeriesRow> rows;
  rows.reserve(traj.snapshots.size());
  double area0 = 0.0;
  for (const auto& snap : traj.snapshots) {
    const auto& state = snap.state;
    const auto& mesh  = state.mesh();
    const int n       = mesh.dim();
    const double t    = state.t();
    const double damp = std::exp(-t / n);
    const auto g      = cap::grad(mesh, state.deviation());

    SeriesRow row;
    row.t           = t;
    row.sup_u       = state.u().max();
    row.inf_u       = state.u().min();
    row.sup_phidot  = snap.phidot.max();
    row.inf_phidot  = snap.phidot.min();
    double lam_lo   = std::numeric_limits<double>::infinity();
    double lam_hi   = 0.0;
    double grad2    = 0.0;
    double du       = 0.0;
    double area     = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      const double lam = warp::eval(state.warp(), state.u()[i]).lambda;
      lam_lo           = std::min(lam_lo, lam);
      lam_hi           = std::max(lam_hi, lam);
      grad2            = std::max(grad2, g.norm_sq[i]);
      du               = std::max(du, lam * std::sqrt(g.norm_sq[i]));
      area += mesh.weights()[i] * std::pow(lam, n) * snap.curvature.v[i];
    }
    if (rows.empty()) { area0 = area; }
    row.sup_lambda_scaled = lam_hi * damp;
    row.inf_lambda_scaled = lam_lo * damp;
    row.sup_gradphi       = std::sqrt(grad2);
    row.sup_Du            = du;
    row.sup_energy        = 0.5 * grad2;
    row.area              = area;
    row.area_ratio        = area * std::exp(-t) / area0;
    row.osc_uhat          = damp * (state.radius_deviation().max() - state.radius_deviation().min());
    row.roundness_dev     = snap.curvature.max_umbilic_deviation();
    row.neumann_res       = snap.neumann_res;
    row.min_H             = snap.curvature.H.min();
    row.min_principal     = snap.curvature.min_principal();
    rows.push_back(row);
  }
  return rows;
}

namespace {

constexpr double kNone = std::numeric_limits<double>::infinity();

Check make_check(std::string name, double tolerance) {
  Check c;
  c.name      = std::move(name);
  c.tolerance = tolerance;
  return c;
}

void record(Check& c, double t, double lo, double hi, double bound_lo, double bound_hi) {
  c.t.push_back(t);
  c.lo.push_back(lo);
  c.hi.push_back(hi);
  c.bound_lo.push_back(bound_lo);
  c.bound_hi.push_back(bound_hi);
  const double margin = std::min(bound_hi + c.tolerance - hi, lo - (bound_lo - c.tolerance));
  if (margin < c.worst_margin) {
    c.worst_margin = margin;
    c.worst_t      = t;
  }
  if (!(margin >= 0.0)) { c.pass = false; }
}

void require_nonempty(const flow::Trajectory& traj) {
  if (traj.snapshots.empty()) { throw ConfigError("empty trajectory"); }
}

}  // namespace

Check lemma31_check(const flow::Trajectory& traj, double slack) {
  require_nonempty(traj);
  const auto rows = series(traj);
  const auto& w   = traj.front().state.warp();
  const double lo = warp::eval(w, rows.front().inf_u).lambda;
  const double hi = warp::eval(w, rows.front().sup_u).lambda;
  Check c         = make_check("lemma31", slack);
  for (const auto& r : rows) { record(c, r.t, r.inf_lambda_scaled, r.sup_lambda_scaled, lo, hi); }
  return c;
}

double envelope_constant(const flow::Trajectory& traj, double alpha, double c_bound) {
  require_nonempty(traj);
  const auto& first = traj.front();
  const int n       = first.state.mesh().dim();
  const double c2   = first.phidot.max();
  const double lam  = warp::eval(first.state.warp(), first.state.u().min()).lambda;
  return n * c2 * c2 * c_bound * std::pow(lam, -alpha);
}

double envelope(double f0, double constant, double alpha, int dim_n, double t) {
  return f0 * std::exp(dim_n * constant / alpha * std::expm1(-alpha * t / dim_n));
}

Check lemma32_check(const flow::Trajectory& traj, double alpha, double c_bound, double slack) {
  require_nonempty(traj);
  const int n           = traj.front().state.mesh().dim();
  const double constant = envelope_constant(traj, alpha, c_bound);
  const double f0       = traj.front().phidot.min();
  const double c2       = traj.front().phidot.max();
  Check c               = make_check("lemma32", slack);
  for (const auto& snap : traj.snapshots) {
    record(c, snap.t(), snap.phidot.min(), snap.phidot.max(),
           envelope(f0, constant, alpha, n, snap.t()), c2);
  }
  return c;
}

Check lemma41_check(const flow::Trajectory& traj, double slack) {
  require_nonempty(traj);
  const auto rows = series(traj);
  Check c         = make_check("lemma41", slack);
  for (const auto& r : rows) {
    record(c, r.t, r.sup_gradphi, r.sup_gradphi, -kNone, rows.front().sup_gradphi);
  }
  return c;
}

Check area_law_check(const flow::Trajectory& traj, double tolerance) {
  require_nonempty(traj);
  const auto rows = series(traj);
  Check c         = make_check("area_law", tolerance);
  for (const auto& r : rows) { record(c, r.t, r.area_ratio, r.area_ratio, 1.0, 1.0); }
  return c;
}

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& y, double t_a,
                   double t_b) {
  if (t.size() != y.size()) { throw ConfigError("decay_fit: t and y differ in length"); }
  DecayFit fit;
  fit.t_a = t_a;
  fit.t_b = t_b;
  std::vector<double> xs, ys;
  const double eps = 1e-12 * std::max(1.0, std::abs(t_b));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_a - eps || t[i] > t_b + eps) { continue; }
    if (!(y[i] > 0.0)) { fit.skipped = true; }
    xs.push_back(t[i]);
    ys.push_back(fit.skipped ? 0.0 : std::log(y[i]));
  }
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 3) {
    throw InsufficientDataError(
        fmt::format("decay_fit needs at least 3 points in [{}, {}], found {}", t_a, t_b, fit.points));
  }
  if (fit.skipped) { return fit; }

  const double m  = static_cast<double>(xs.size());
  double mx       = 0.0;
  double my       = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) { throw InsufficientDataError("decay_fit: all sample times coincide"); }
  const double slope = sxy / sxx;
  fit.rate           = -slope;
  fit.log_prefactor  = my - slope * mx;
  double ss_res      = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.log_prefactor + slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

Roundness roundness(const flow::Trajectory& traj) {
  Roundness out;
  for (const auto& r : series(traj)) {
    out.t.push_back(r.t);
    out.dev.push_back(r.roundness_dev);
    out.osc_uhat.push_back(r.osc_uhat);
  }
  return out;
}

namespace {

// int_a^b sin^m by 5-point Gauss-Legendre.
double sine_power_integral(double a, double b, int m) {
  static constexpr double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                  0.5384693101056831, 0.9061798459386640};
  static constexpr double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                  0.4786286704993665, 0.2369268850561891};
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s         = 0.0;
  for (int q = 0; q < 5; ++q) { s += w[q] * std::pow(std::sin(mid + half * x[q]), m); }
  return s * half;
}

}  // namespace

double elliptic_residual(const graph::GraphState& state, const cap::ScalarField& phidot) {
  const auto& mesh = state.mesh();
  const auto& w    = state.deviation();
  const int n      = mesh.dim();
  const int m      = n - 1;
  const int nt     = mesh.n_theta();
  const double h   = mesh.h_theta();
  const auto jet   = cap::jet(mesh, w.span());
  const auto slope = state.slope_field();

  // Cell volumes per unit fiber measure; the boundary cell is centred on theta0 (even ghost).
  std::vector<double> volume(nt);
  for (int k = 0; k < nt; ++k) {
    const double a = k == 0 ? 0.0 : mesh.theta(k) - 0.5 * h;
    volume[k]      = sine_power_integral(a, mesh.theta(k) + 0.5 * h, m);
  }

  double worst = 0.0;
  for (int j = 0; j < mesh.n_psi(); ++j) {
    auto at = [&](int k) {
      // even ghost beyond theta0
      return k < nt ? w[mesh.index(k, j)] : w[mesh.index(2 * (nt - 1) - k, j)];
    };
    auto dpsi_at = [&](int k) {
      if (!mesh.periodic()) { return 0.0; }
      return k < nt ? jet.d_psi[mesh.index(k, j)] : jet.d_psi[mesh.index(2 * (nt - 1) - k, j)];
    };
    auto theta_flux = [&](int k) {  // through theta_{k + 1/2}
      if (k < 0) { return 0.0; }
      const double th  = k + 1 < nt ? mesh.theta(k) + 0.5 * h : mesh.theta0() + 0.5 * h;
      const double s   = std::sin(th);
      const double dt  = (at(k + 1) - at(k)) / h;
      const double dp  = 0.5 * (dpsi_at(k) + dpsi_at(k + 1));
      const double vh  = std::sqrt(1.0 + dt * dt + dp * dp / (s * s));
      return std::pow(s, m) * dt / vh;
    };
    for (int k = 0; k < nt; ++k) {
      const std::size_t i = mesh.index(k, j);
      double div          = (theta_flux(k) - theta_flux(k - 1)) / volume[k];
      const double s      = mesh.sin_theta(k);
      double g2           = jet.d_theta[i] * jet.d_theta[i];
      if (mesh.periodic()) {
        const double hp = mesh.h_psi();
        const int np    = mesh.n_psi();
        auto psi_flux   = [&](int jj) {  // through psi_{jj + 1/2}
          const int a      = (jj + np) % np;
          const int b      = (jj + 1 + np) % np;
          const double dp  = (w[mesh.index(k, b)] - w[mesh.index(k, a)]) / hp;
          const double dt  = 0.5 * (jet.d_theta[mesh.index(k, a)] + jet.d_theta[mesh.index(k, b)]);
          const double vh  = std::sqrt(1.0 + dt * dt + dp * dp / (s * s));
          return dp / vh;
        };
        div += (psi_flux(j) - psi_flux(j - 1)) / (hp * s * s);
        g2 += jet.d_psi[i] * jet.d_psi[i] / (s * s);
      }
      const double v   = std::sqrt(1.0 + g2);
      const double res = div - n * slope[i] / v + v / phidot[i];
      worst            = std::max(worst, std::abs(res));
    }
  }
  return worst;
}

bool BoundsReport::monitors_pass() const {
  return lemma31.pass && lemma32.pass && lemma41.pass && area_law.pass && h_positive;
}

BoundsReport analyze(const flow::Trajectory& traj, const AnalysisOptions& options) {
  require_nonempty(traj);
  BoundsReport report;
  const double slack = options.slack < 0.0 ? default_slack(traj) : options.slack;
  report.rows        = series(traj);
  report.lemma31     = lemma31_check(traj, slack);
  report.lemma32     = lemma32_check(traj, options.alpha, options.c_bound, slack);
  report.lemma41     = lemma41_check(traj, slack);
  report.area_law    = area_law_check(traj, options.area_tolerance);
  report.envelope_constant = envelope_constant(traj, options.alpha, options.c_bound);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    report.rows[i].envelope_f = report.lemma32.bound_lo[i];
    if (!(report.rows[i].min_H > 0.0)) { report.h_positive = false; }
  }

  const double t_end = report.rows.back().t;
  const double t_a   = options.fit_start < 0.0 ? 0.25 * t_end : options.fit_start;
  const double t_b   = options.fit_end < 0.0 ? t_end : options.fit_end;
  std::vector<double> t, du, dev;
  for (const auto& r : report.rows) {
    t.push_back(r.t);
    du.push_back(r.sup_Du);
    dev.push_back(r.roundness_dev);
  }
  auto fit = [&](const std::vector<double>& y, DecayFit& out, std::string& note) {
    try {
      out = decay_fit(t, y, t_a, t_b);
      if (out.skipped) { note = "nonpositive values in the fit window"; }
    } catch (const InsufficientDataError& e) {
      out.skipped = true;
      out.t_a     = t_a;
      out.t_b     = t_b;
      note        = e.what();
    }
  };
  fit(du, report.du_fit, report.du_fit_note);
  fit(dev, report.roundness_fit, report.roundness_fit_note);
  return report;
}

std::string series_csv(const std::vector<SeriesRow>& rows) {
  std::string out;
  const auto& columns = series_columns();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out += columns[i];
    out += i + 1 < columns.size() ? ',' : '\n';
  }
  for (const auto& r : rows) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
                       "{:.17g},{:.17g},{:.17g},{:.17g}\n",
                       r.t, r.sup_u, r.inf_u, r.sup_phidot, r.inf_phidot, r.sup_gradphi, r.sup_Du,
                       r.area, r.area_ratio, r.osc_uhat, r.roundness_dev, r.neumann_res,
                       r.envelope_f);
  }
  return out;
}

nlohmann::json to_json(const Check& check) {
  return {{"pass", check.pass},
          {"tolerance", check.tolerance},
          {"worst_margin", check.worst_margin},
          {"worst_t", check.worst_t}};
}

nlohmann::json to_json(const DecayFit& fit) {
  return {{"rate", fit.rate},       {"log_prefactor", fit.log_prefactor},
          {"r_squared", fit.r_squared}, {"window", {fit.t_a, fit.t_b}},
          {"points", fit.points},   {"skipped", fit.skipped}};
}

nlohmann::json to_json(const BoundsReport& report) {
  nlohmann::json j;
  j["monitors"] = {{"lemma31", to_json(report.lemma31)},
                   {"lemma32", to_json(report.lemma32)},
                   {"lemma41", to_json(report.lemma41)},
                   {"area_law", to_json(report.area_law)},
                   {"h_positive", report.h_positive}};
  j["envelope_constant"] = report.envelope_constant;
  j["decay_fits"]        = {{"sup_Du", to_json(report.du_fit)},
                     {"roundness_dev", to_json(report.roundness_fit)}};
  if (!report.du_fit_note.empty()) { j["decay_fits"]["sup_Du"]["note"] = report.du_fit_note; }
  if (!report.roundness_fit_note.empty()) {
    j["decay_fits"]["roundness_dev"]["note"] = report.roundness_fit_note;
  }
  const auto& last         = report.rows.back();
  j["final"]               = {{"t", last.t},
                {"roundness_dev", last.roundness_dev},
                {"osc_uhat", last.osc_uhat},
                {"area_ratio", last.area_ratio},
                {"sup_Du", last.sup_Du}};
  j["monitors_pass"] = report.monitors_pass();
  return j;
}

double observed_order(const std::vector<double>& h, const std::vector<double>& q) {
  if (h.size() != 3 || q.size() != 3) { throw ConfigError("observed_order needs three levels"); }
  const double d1 = q[0] - q[1];
  const double d2 = q[1] - q[2];
  if (d2 == 0.0 || d1 / d2 <= 0.0) { return std::numeric_limits<double>::quiet_NaN(); }
  const double ratio = d1 / d2;
  auto f = [&](double p) {
    return (std::pow(h[0], p) - std::pow(h[1], p)) / (std::pow(h[1], p) - std::pow(h[2], p)) - ratio;
  };
  const double lo = 0.05, hi = 20.0;
  if (f(lo) * f(hi) > 0.0) { return std::numeric_limits<double>::quiet_NaN(); }
  boost::math::tools::eps_tolerance<double> tol(40);
  const auto [a, b] = boost::math::tools::bisect(f, lo, hi, tol);
  return 0.5 * (a + b);
}

}  // namespace imcf::diag
