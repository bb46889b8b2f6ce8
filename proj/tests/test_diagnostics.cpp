#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "imcf/diagnostics.hpp"
#include "imcf/errors.hpp"
#include "support.hpp"

using namespace imcf;
using doctest::Approx;
using std::numbers::pi;

TEST_CASE("decay fit") {
  std::vector<double> t, y;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(0.1 * i);
    y.push_back(3.0 * std::exp(-0.5 * t.back()));
  }
  auto fit = diag::decay_fit(t, y, 0.0, 2.0);
  CHECK(fit.rate == Approx(0.5).epsilon(1e-12));
  CHECK(fit.log_prefactor == Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.r_squared == Approx(1.0).epsilon(1e-12));
  CHECK(fit.points == 21);

  fit = diag::decay_fit(t, y, 0.5, 1.0);
  CHECK(fit.points == 6);
  CHECK(fit.rate == Approx(0.5).epsilon(1e-12));

  std::vector<double> flat(t.size(), 2.0);
  fit = diag::decay_fit(t, flat, 0.0, 2.0);
  CHECK(fit.rate == 0.0);
  CHECK(fit.r_squared == 1.0);

  CHECK_THROWS_AS(diag::decay_fit(t, y, 0.0, 0.15), InsufficientDataError);
  CHECK_THROWS_AS(diag::decay_fit({0.0, 1.0}, {1.0, 2.0}, 0.0, 1.0), InsufficientDataError);

  y[3] = 0.0;
  fit  = diag::decay_fit(t, y, 0.0, 2.0);
  CHECK(fit.skipped);
}

TEST_CASE("envelope") {
  CHECK(diag::envelope(0.5, 0.0, 1.0, 2, 3.0) == 0.5);
  CHECK(diag::envelope(0.5, 1.0, 1.0, 2, 0.0) == 0.5);
  // f' = -C e^{-alpha t / n} f
  const double C = 0.7, a = 0.8, f0 = 0.4, h = 1e-5;
  for (double t : {0.2, 1.0, 4.0}) {
    const double d = (diag::envelope(f0, C, a, 3, t + h) - diag::envelope(f0, C, a, 3, t - h)) / (2 * h);
    CHECK(d == Approx(-C * std::exp(-a * t / 3) * diag::envelope(f0, C, a, 3, t)).epsilon(1e-8));
  }
  CHECK(diag::envelope(f0, C, a, 3, 1e3) == Approx(f0 * std::exp(-3 * C / a)).epsilon(1e-12));
}

TEST_CASE("observed order") {
  const std::vector<double> h = {0.04, 0.02, 0.01};
  for (double p : {1.0, 2.0, 4.0}) {
    std::vector<double> q;
    for (double x : h) { q.push_back(1.5 + 0.3 * std::pow(x, p)); }
    CHECK(diag::observed_order(h, q) == Approx(p).epsilon(1e-8));
  }
  CHECK(std::isnan(diag::observed_order(h, {1.0, 2.0, 1.5})));
  CHECK(std::isnan(diag::observed_order(h, {1.0, 1.0, 1.0})));
  CHECK_THROWS_AS(diag::observed_order({0.1, 0.05}, {1.0, 2.0}), ConfigError);
}

TEST_CASE("monitors on a radial trajectory") {
  flow::FlowConfig cfg;
  cfg.t_end           = 1.0;
  cfg.snapshot_stride = 0.25;
  auto st   = support::radius_state(support::euclid(), support::mesh(2, pi / 3, 64), [](double, double) { return 1.0; });
  auto traj = flow::evolve(st, cfg);
  const auto rows = diag::series(traj);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) {
    CHECK(r.sup_lambda_scaled == Approx(1.0).epsilon(1e-9));
    CHECK(r.sup_phidot == Approx(0.5).epsilon(1e-12));
    CHECK(r.sup_gradphi == 0.0);
    CHECK(r.area_ratio == Approx(1.0).epsilon(1e-9));
    CHECK(r.osc_uhat == 0.0);
    CHECK(r.roundness_dev < 1e-12);
  }
  // S^2 cap area at theta0 = pi/3 is pi
  CHECK(rows.front().area == Approx(pi).epsilon(1e-10));

  diag::AnalysisOptions opt;
  opt.c_bound = 0.0;
  const auto rep = diag::analyze(traj, opt);
  CHECK(rep.monitors_pass());
  CHECK(rep.envelope_constant == 0.0);
  CHECK(rep.du_fit.skipped);
  const auto j = diag::to_json(rep);
  CHECK(j["monitors_pass"] == true);
  CHECK(j["final"]["t"] == 1.0);

  const auto csv = diag::series_csv(rep.rows);
  CHECK(csv.rfind("t,sup_u,inf_u,sup_phidot,inf_phidot,sup_gradphi,sup_Du,area,area_ratio,osc_uhat,"
                  "roundness_dev,neumann_res,envelope_f\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

  auto c = diag::area_law_check(traj, 1e-3);
  CHECK(c.pass);
  CHECK(c.t.size() == 5);
}

TEST_CASE("a violated bound fails the check") {
  flow::FlowConfig cfg;
  cfg.t_end           = 0.5;
  cfg.snapshot_stride = 0.25;
  auto st   = support::radius_state(support::euclid(), support::mesh(2, pi / 3, 48),
                                    [](double t, double) { return 1 + 0.05 * std::cos(3 * t); });
  auto traj = flow::evolve(flow::apply_neumann(st), cfg);
  // scale the later phidot above its initial supremum
  traj.snapshots.back().phidot.values()[0] = 2.0 * traj.front().phidot.max();
  const auto c = diag::lemma32_check(traj, 1.0, 0.0, 0.0);
  CHECK_FALSE(c.pass);
  CHECK(c.worst_t == traj.back().t());
  CHECK(c.worst_margin < 0.0);
}

TEST_CASE("elliptic residual converges at second order") {
  auto res = [](int nt) {
    auto m  = support::mesh(2, pi / 3, nt);
    auto st = flow::apply_neumann(support::radius_state(support::euclid(), m, [](double t, double) {
      return 1 + 0.05 * std::cos(3 * t);
    }));
    return diag::elliptic_residual(st, flow::rhs(st));
  };
  const double r1 = res(64), r2 = res(128);
  CHECK(r1 < 1e-2);
  CHECK(r1 / r2 == Approx(4.0).epsilon(0.2));

  auto m  = support::mesh(2, pi / 3, 32);
  auto st = support::radius_state(support::euclid(), m, [](double, double) { return 1.0; });
  CHECK(diag::elliptic_residual(st, flow::rhs(st)) < 1e-13);
}
