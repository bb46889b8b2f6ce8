#pragma once

#include <json.hpp>
#include <limits>
#include <string>
#include <vector>

#include "imcf/flowcore.hpp"

namespace imcf::diag {

/// One row of series.csv plus a few monitor-only columns.
struct SeriesRow {
  double t = 0.0;
  double sup_u = 0.0, inf_u = 0.0;
  double sup_lambda_scaled = 0.0, inf_lambda_scaled = 0.0;  // lambda(u) e^{-t/n}
  double sup_phidot = 0.0, inf_phidot = 0.0;
  double sup_gradphi = 0.0;
  double sup_Du = 0.0;      // sup lambda |grad phi|
  double sup_energy = 0.0;  // sup |grad phi|^2 / 2
  double area = 0.0, area_ratio = 1.0;
  double osc_uhat = 0.0;
  double roundness_dev = 0.0;
  double neumann_res = 0.0;
  double envelope_f = 0.0;
  double min_H = 0.0;
  double min_principal = 0.0;
};

/// The columns of series.csv, in order.
const std::vector<std::string>& series_columns();

/// Observed band [lo, hi] of a monitored quantity against bounds, with additive slack.
struct Check {
  std::string name;
  std::vector<double> t, lo, hi, bound_lo, bound_hi;
  double tolerance = 0.0;
  bool pass = true;
  /// Smallest remaining room to a bound (negative on violation).
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
};

/// 10 h_theta^2 of the trajectory's mesh.
double default_slack(const flow::Trajectory& traj);

std::vector<SeriesRow> series(const flow::Trajectory& traj);

Check lemma31_check(const flow::Trajectory& traj, double slack);
/// Envelope constant of the comparison ODE: n C_2^2 c_bound lambda(inf u0)^{-alpha}.
double envelope_constant(const flow::Trajectory& traj, double alpha, double c_bound);
/// f(t) = f0 exp((n C / alpha)(e^{-alpha t / n} - 1)).
double envelope(double f0, double constant, double alpha, int dim_n, double t);
Check lemma32_check(const flow::Trajectory& traj, double alpha, double c_bound, double slack);
Check lemma41_check(const flow::Trajectory& traj, double slack);
Check area_law_check(const flow::Trajectory& traj, double tolerance = 1e-3);

struct DecayFit {
  double rate = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  double t_a = 0.0, t_b = 0.0;
  int points = 0;
  bool skipped = false;  // nonpositive values inside the window
};

/// Least-squares line through (t, log y) on the window. Throws InsufficientDataError for fewer than
/// 3 points in the window.
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& y, double t_a,
                   double t_b);

struct Roundness {
  std::vector<double> t, dev, osc_uhat;
};
Roundness roundness(const flow::Trajectory& traj);

/// Sup-norm of div_sigma(grad phi / v) - n lambda' / v + v / phidot with a conservative flux
/// discretization of the divergence.
double elliptic_residual(const graph::GraphState& state, const cap::ScalarField& phidot);

struct AnalysisOptions {
  double alpha = 1.0;
  double c_bound = 1.0;
  double slack = -1.0;  // negative: 10 h_theta^2
  double area_tolerance = 1e-3;
  double fit_start = -1.0;  // negative: t_end / 4
  double fit_end = -1.0;    // negative: t_end
};

struct BoundsReport {
  std::vector<SeriesRow> rows;
  Check lemma31, lemma32, lemma41, area_law;
  double envelope_constant = 0.0;
  DecayFit du_fit, roundness_fit;
  std::string du_fit_note, roundness_fit_note;
  bool h_positive = true;

  bool monitors_pass() const;
};

BoundsReport analyze(const flow::Trajectory& traj, const AnalysisOptions& options);

std::string series_csv(const std::vector<SeriesRow>& rows);
nlohmann::json to_json(const Check& check);
nlohmann::json to_json(const DecayFit& fit);
nlohmann::json to_json(const BoundsReport& report);

/// Order p with (h1^p - h2^p) / (h2^p - h3^p) = (q1 - q2) / (q2 - q3) for h1 > h2 > h3.
/// Returns NaN when the differences do not have a consistent sign.
double observed_order(const std::vector<double>& h, const std::vector<double>& q);

}  // namespace imcf::diag
