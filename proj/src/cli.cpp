#include "imcf/cli.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "imcf/errors.hpp"
#include "imcf/log.hpp"
#include "imcf/oracle.hpp"

namespace imcf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kTopKeys = {
    "warp",       "n",          "theta0",          "mode",      "n_theta", "n_psi",
    "r0",         "t_end",      "dt_initial",      "cfl_safety", "snapshot_stride",
    "max_steps",  "scheme",     "initial",         "output",    "levels",  "fit_window"};
const std::vector<std::string> kWarpKeys    = {"lambda", "a", "alpha", "c_bound", "base_point",
                                               "lambda_table"};
const std::vector<std::string> kInitialKeys = {"shape", "amplitude"};
const std::vector<std::string> kOutputKeys  = {"directory", "emit_fields", "emit_plots"};

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) { row[j] = j; }
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0]           = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag   = up;
    }
  }
  return row[b.size()];
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    const std::string leaf = path.substr(path.rfind('.') == std::string::npos ? 0 : path.rfind('.') + 1);
    const int line         = line_of(leaf);
    throw ConfigError(line > 0 ? fmt::format("{}:{}: {}: {}", source_, line, path, message)
                               : fmt::format("{}: {}: {}", source_, path, message));
  }

  int line_of(const std::string& key) const {
    const auto pos = text_.find('"' + key + '"');
    if (pos == std::string::npos) { return 0; }
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + pos, '\n'));
  }

  void reject_unknown(const json& object, const std::string& prefix,
                      const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : object.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) { continue; }
      fail(join(prefix, key), fmt::format("unknown key{}", suggestion(key, allowed, prefix)));
    }
  }

  double number(const json& object, const std::string& prefix, const std::string& key,
                double fallback, bool required = false) const {
    if (!object.contains(key)) {
      if (required) { fail(join(prefix, key), "required key missing"); }
      return fallback;
    }
    const auto& v = object.at(key);
    if (!v.is_number()) { fail(join(prefix, key), "expected a number"); }
    const double x = v.get<double>();
    if (!std::isfinite(x)) { fail(join(prefix, key), "expected a finite number"); }
    return x;
  }

  long integer(const json& object, const std::string& prefix, const std::string& key,
               long fallback, bool required = false) const {
    if (!object.contains(key)) {
      if (required) { fail(join(prefix, key), "required key missing"); }
      return fallback;
    }
    const auto& v = object.at(key);
    if (!v.is_number_integer()) { fail(join(prefix, key), "expected an integer"); }
    return v.get<long>();
  }

  std::string string(const json& object, const std::string& prefix, const std::string& key,
                     const std::string& fallback) const {
    if (!object.contains(key)) { return fallback; }
    const auto& v = object.at(key);
    if (!v.is_string()) { fail(join(prefix, key), "expected a string"); }
    return v.get<std::string>();
  }

  bool boolean(const json& object, const std::string& prefix, const std::string& key,
               bool fallback) const {
    if (!object.contains(key)) { return fallback; }
    const auto& v = object.at(key);
    if (!v.is_boolean()) { fail(join(prefix, key), "expected true or false"); }
    return v.get<bool>();
  }

  static std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
  }

 private:
  static std::string suggestion(const std::string& key, const std::vector<std::string>& allowed,
                                const std::string& prefix) {
    std::string best;
    std::size_t best_distance = 3;
    auto consider             = [&](const std::string& candidate, const std::string& path) {
      const std::size_t d = edit_distance(key, candidate);
      if (d < best_distance) {
        best_distance = d;
        best          = path;
      }
    };
    for (const auto& k : allowed) { consider(k, join(prefix, k)); }
    if (best.empty()) {
      for (const auto& k : kWarpKeys) { consider(k, "warp." + k); }
      for (const auto& k : kInitialKeys) { consider(k, "initial." + k); }
      for (const auto& k : kOutputKeys) { consider(k, "output." + k); }
      for (const auto& k : kTopKeys) { consider(k, k); }
    }
    return best.empty() ? "" : fmt::format(" (did you mean \"{}\"?)", best);
  }

  const std::string& text_;
  std::string source_;
};

void parse_warp(const Reader& r, const json& root, WarpConfig& out) {
  if (!root.contains("warp")) { r.fail("warp", "required key missing"); }
  const auto& w = root.at("warp");
  if (w.is_string()) {
    out.name = w.get<std::string>();
  } else if (w.is_object()) {
    r.reject_unknown(w, "warp", kWarpKeys);
    out.name  = r.string(w, "warp", "lambda", "euclidean");
    out.a     = r.number(w, "warp", "a", out.a);
    out.alpha = r.number(w, "warp", "alpha", out.alpha);
    if (w.contains("c_bound")) { out.c_bound = r.number(w, "warp", "c_bound", 0.0); }
    if (w.contains("base_point")) { out.base_point = r.number(w, "warp", "base_point", 0.0); }
    if (w.contains("lambda_table")) {
      const auto& table = w.at("lambda_table");
      if (!table.is_array()) { r.fail("warp.lambda_table", "expected an array of [r, lambda] pairs"); }
      for (const auto& entry : table) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
            !entry[1].is_number()) {
          r.fail("warp.lambda_table", "expected an array of [r, lambda] pairs");
        }
        out.table.emplace_back(entry[0].get<double>(), entry[1].get<double>());
      }
    }
  } else {
    r.fail("warp", "expected a warp name or an object");
  }
  if (out.name != "euclidean" && out.name != "hyperboloidal" && out.name != "tabulated") {
    r.fail(w.is_object() ? "warp.lambda" : "warp",
           fmt::format("unknown warp '{}' (expected euclidean, hyperboloidal or tabulated)", out.name));
  }
  if (out.name == "tabulated" && out.table.empty()) {
    r.fail("warp.lambda_table", "tabulated warp needs lambda_table samples");
  }
  if (!(out.alpha > 0.0)) { r.fail("warp.alpha", "must be positive"); }
  if (out.c_bound && !(*out.c_bound > 0.0)) { r.fail("warp.c_bound", "must be positive"); }
  if (out.name == "hyperboloidal" && !(out.a > 0.0)) { r.fail("warp.a", "must be positive"); }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto end  = std::min<std::size_t>(e.byte, text.size());
    const int line  = 1 + static_cast<int>(std::count(text.begin(), text.begin() + end, '\n'));
    throw ConfigError(fmt::format("{}:{}: invalid JSON: {}", source, line, e.what()));
  }
  if (!root.is_object()) { throw ConfigError(fmt::format("{}: expected a JSON object", source)); }

  const Reader r(text, source);
  r.reject_unknown(root, "", kTopKeys);

  ExperimentConfig c;
  c.source = source;
  parse_warp(r, root, c.warp);

  c.n = static_cast<int>(r.integer(root, "", "n", c.n, true));
  if (c.n < 2) { r.fail("n", "must be at least 2"); }
  c.theta0 = r.number(root, "", "theta0", 0.0, true);
  if (!(c.theta0 > 0.0 && c.theta0 <= 0.5 * std::numbers::pi + 1e-12)) {
    r.fail("theta0", "must lie in (0, pi/2]");
  }
  const std::string mode = r.string(root, "", "mode", "axisym");
  if (mode != "axisym" && mode != "full2d") { r.fail("mode", "expected axisym or full2d"); }
  c.mode    = cap::parse_mode(mode);
  c.n_theta = static_cast<int>(r.integer(root, "", "n_theta", c.n_theta));
  if (c.n_theta < 4) { r.fail("n_theta", "must be at least 4"); }
  c.n_psi = static_cast<int>(r.integer(root, "", "n_psi", c.mode == cap::Mode::full2d ? 16 : 1));
  if (c.mode == cap::Mode::axisym && c.n_psi != 1) { r.fail("n_psi", "must be 1 in axisym mode"); }
  if (c.mode == cap::Mode::full2d) {
    if (c.n != 2) { r.fail("mode", "full2d requires n = 2"); }
    if (c.n_psi < 8 || c.n_psi % 2 != 0) { r.fail("n_psi", "must be even and at least 8"); }
  }
  c.r0 = r.number(root, "", "r0", 0.0, true);
  if (!(c.r0 > 0.0)) { r.fail("r0", "must be positive"); }

  c.flow.t_end = r.number(root, "", "t_end", 0.0, true);
  if (!(c.flow.t_end > 0.0)) { r.fail("t_end", "must be positive"); }
  c.flow.dt_initial = r.number(root, "", "dt_initial", 1e-3);
  if (!(c.flow.dt_initial > 0.0)) { r.fail("dt_initial", "must be positive"); }
  c.flow.cfl_safety = r.number(root, "", "cfl_safety", c.flow.cfl_safety);
  if (!(c.flow.cfl_safety > 0.0 && c.flow.cfl_safety <= 1.0)) { r.fail("cfl_safety", "must lie in (0, 1]"); }
  c.flow.snapshot_stride = r.number(root, "", "snapshot_stride", c.flow.snapshot_stride);
  if (!(c.flow.snapshot_stride > 0.0)) { r.fail("snapshot_stride", "must be positive"); }
  c.flow.max_steps = r.integer(root, "", "max_steps", c.flow.max_steps);
  if (c.flow.max_steps < 1) { r.fail("max_steps", "must be at least 1"); }
  const std::string scheme = r.string(root, "", "scheme", "rk4");
  if (scheme != "rk4" && scheme != "heun") { r.fail("scheme", "expected rk4 or heun"); }
  c.flow.scheme = flow::parse_scheme(scheme);

  if (root.contains("initial")) {
    const auto& init = root.at("initial");
    if (!init.is_object()) { r.fail("initial", "expected an object"); }
    r.reject_unknown(init, "initial", kInitialKeys);
    c.initial.shape     = r.string(init, "initial", "shape", c.initial.shape);
    c.initial.amplitude = r.number(init, "initial", "amplitude", 0.0);
  }
  const auto& shape = c.initial.shape;
  if (shape != "cosine-even" && shape != "bump" && shape != "tilted") {
    r.fail("initial.shape", fmt::format("unknown shape '{}' (expected cosine-even, bump or tilted)", shape));
  }
  if (shape == "tilted" && c.mode != cap::Mode::full2d) {
    r.fail("initial.shape", "tilted data needs mode full2d");
  }
  if (!(c.initial.amplitude >= 0.0 && c.initial.amplitude < 0.5 * c.r0)) {
    r.fail("initial.amplitude", fmt::format("must lie in [0, 0.5 * r0) = [0, {})", 0.5 * c.r0));
  }

  if (root.contains("output")) {
    const auto& out = root.at("output");
    if (!out.is_object()) { r.fail("output", "expected an object"); }
    r.reject_unknown(out, "output", kOutputKeys);
    c.output.directory   = r.string(out, "output", "directory", c.output.directory);
    c.output.emit_fields = r.boolean(out, "output", "emit_fields", false);
    c.output.emit_plots  = r.boolean(out, "output", "emit_plots", false);
  }

  if (root.contains("levels")) {
    const auto& levels = root.at("levels");
    if (!levels.is_array()) { r.fail("levels", "expected an array of integers"); }
    c.levels.clear();
    for (const auto& v : levels) {
      if (!v.is_number_integer() || v.get<long>() < 4) {
        r.fail("levels", "expected integers >= 4");
      }
      c.levels.push_back(v.get<int>());
    }
  }
  if (root.contains("fit_window")) {
    const auto& fw = root.at("fit_window");
    if (!fw.is_array() || fw.size() != 2 || !fw[0].is_number() || !fw[1].is_number() ||
        !(fw[0].get<double>() < fw[1].get<double>())) {
      r.fail("fit_window", "expected [t_a, t_b] with t_a < t_b");
    }
    c.fit_window = std::make_pair(fw[0].get<double>(), fw[1].get<double>());
  }
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) { throw ConfigError(fmt::format("cannot read config file '{}'", path)); }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::shared_ptr<const warp::WarpSpec> make_warp(const WarpConfig& config) {
  if (config.name == "euclidean") {
    return std::make_shared<const warp::WarpSpec>(warp::euclidean(
        config.alpha, config.c_bound.value_or(1.0), config.base_point.value_or(1.0)));
  }
  if (config.name == "hyperboloidal") {
    return std::make_shared<const warp::WarpSpec>(warp::hyperboloidal(
        config.a, config.alpha, config.c_bound.value_or(-1.0), config.base_point.value_or(0.0)));
  }
  if (config.name == "tabulated") {
    if (config.table.empty()) { throw ConfigError("tabulated warp needs samples"); }
    return std::make_shared<const warp::WarpSpec>(
        warp::tabulated(config.table, config.alpha, config.c_bound.value_or(1.0),
                        config.base_point.value_or(config.table.front().first)));
  }
  throw ConfigError(fmt::format("unknown warp '{}'", config.name));
}

cap::ScalarField initial_radius(const ExperimentConfig& config, const cap::CapMesh& mesh) {
  cap::ScalarField u(mesh.size(), config.r0);
  const double amp = config.initial.amplitude;
  if (amp == 0.0) { return u; }
  const double t0 = config.theta0;
  // Quadratic cutoff with zero theta-derivative of sin^2(theta)(1 - a x^2) at theta0.
  const double cutoff = std::cos(t0) / (std::cos(t0) + std::sin(t0) / t0);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double th = mesh.theta(mesh.row_of(i));
    const double ps = mesh.psi(mesh.column_of(i));
    const double x  = th / t0;
    if (config.initial.shape == "cosine-even") {
      u[i] += amp * std::cos(std::numbers::pi * x);
    } else if (config.initial.shape == "bump") {
      u[i] += amp * (1.0 - x * x) * (1.0 - x * x);
    } else {
      const double s = std::sin(th);
      u[i] += amp * s * s * std::cos(ps) * (1.0 - cutoff * x * x);
    }
  }
  return u;
}

graph::GraphState initial_state(const ExperimentConfig& config) {
  auto warp  = make_warp(config.warp);
  auto chart = warp::make_chart(warp);
  auto mesh  = std::make_shared<const cap::CapMesh>(
      cap::build_mesh(config.n, config.theta0, config.mode, config.n_theta, config.n_psi));
  const auto u = initial_radius(config, *mesh);
  try {
    return graph::GraphState::from_radius(mesh, chart, u);
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("initial data outside the warp interval: {}", e.what()));
  }
}

int exit_code_for(const flow::Trajectory& traj, const diag::BoundsReport& report) {
  if (traj.status != flow::Status::completed) { return kSingularity; }
  return report.monitors_pass() ? kOk : kMonitorViolation;
}

RunResult run_experiment(const ExperimentConfig& config) {
  RunResult result;
  auto state  = initial_state(config);
  const auto& spec = state.warp();
  result.warp_report = warp::validate(spec);
  if (!result.warp_report.pass()) {
    for (const auto& check : result.warp_report.checks) {
      if (!check.pass) {
        throw ConfigError(fmt::format("warp '{}' fails the {} hypothesis at r = {} (value {})",
                                      spec.name, check.name, check.worst_r, check.worst_value));
      }
    }
  }
  log::info("run: warp {} n={} theta0={} mode={} n_theta={} n_psi={} r0={} amplitude={} t_end={}",
            spec.name, config.n, config.theta0, cap::to_string(config.mode), config.n_theta,
            config.n_psi, config.r0, config.initial.amplitude, config.flow.t_end);
  result.trajectory = flow::evolve(state, config.flow);

  diag::AnalysisOptions options;
  options.alpha   = spec.alpha;
  options.c_bound = result.warp_report.sup_curvature_product();
  if (config.fit_window) {
    options.fit_start = config.fit_window->first;
    options.fit_end   = config.fit_window->second;
  }
  result.report    = diag::analyze(result.trajectory, options);
  result.exit_code = exit_code_for(result.trajectory, result.report);
  return result;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw ConfigError(fmt::format("cannot write '{}'", path.string())); }
  out << content;
}

json config_json(const ExperimentConfig& c) {
  json j = {{"source", c.source},
            {"warp", {{"lambda", c.warp.name}, {"a", c.warp.a}, {"alpha", c.warp.alpha}}},
            {"n", c.n},
            {"theta0", c.theta0},
            {"mode", cap::to_string(c.mode)},
            {"n_theta", c.n_theta},
            {"n_psi", c.n_psi},
            {"r0", c.r0},
            {"t_end", c.flow.t_end},
            {"cfl_safety", c.flow.cfl_safety},
            {"snapshot_stride", c.flow.snapshot_stride},
            {"scheme", flow::to_string(c.flow.scheme)},
            {"initial", {{"shape", c.initial.shape}, {"amplitude", c.initial.amplitude}}}};
  if (c.warp.c_bound) { j["warp"]["c_bound"] = *c.warp.c_bound; }
  if (c.warp.base_point) { j["warp"]["base_point"] = *c.warp.base_point; }
  return j;
}

std::string fields_csv(const flow::Snapshot& snap) {
  const auto& state = snap.state;
  const auto& mesh  = state.mesh();
  std::string out   = "theta,psi,phi,u,v,H,phidot\n";
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                       mesh.theta(mesh.row_of(i)), mesh.psi(mesh.column_of(i)),
                       state.level() + state.deviation()[i], state.u()[i], snap.curvature.v[i],
                       snap.curvature.H[i], snap.phidot[i]);
  }
  return out;
}

constexpr const char* kPlotScript = R"(import sys
import pandas as pd
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "series.csv")
fig, axes = plt.subplots(2, 2, figsize=(10, 7))
axes[0, 0].plot(df.t, df.sup_u, label="sup u")
axes[0, 0].plot(df.t, df.inf_u, label="inf u")
axes[0, 0].legend()
axes[0, 1].plot(df.t, df.sup_phidot, label="sup phidot")
axes[0, 1].plot(df.t, df.inf_phidot, label="inf phidot")
axes[0, 1].plot(df.t, df.envelope_f, "--", label="envelope")
axes[0, 1].legend()
for col in ["sup_Du", "roundness_dev", "osc_uhat"]:
    axes[1, 0].semilogy(df.t, df[col].clip(lower=1e-300), label=col)
axes[1, 0].legend()
axes[1, 1].plot(df.t, df.area_ratio - 1.0, label="area_ratio - 1")
axes[1, 1].legend()
for ax in axes.flat:
    ax.set_xlabel("t")
fig.tight_layout()
fig.savefig("series.png", dpi=120)
)";

}  // namespace

void write_outputs(const ExperimentConfig& config, const RunResult& result,
                   const std::string& directory) {
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) { throw ConfigError(fmt::format("cannot create '{}': {}", directory, ec.message())); }

  write_file(dir / "series.csv", diag::series_csv(result.report.rows));

  const auto& traj = result.trajectory;
  json summary     = diag::to_json(result.report);
  summary["config"]                 = config_json(config);
  summary["status"]                 = flow::to_string(traj.status);
  summary["message"]                = traj.message;
  summary["steps"]                  = traj.steps;
  summary["rejected_steps"]         = traj.rejected;
  summary["snapshots"]              = traj.snapshots.size();
  summary["exit_code"]              = result.exit_code;
  summary["convexity_warning"]      = traj.convexity_warning;
  summary["initial_min_curvature"]  = traj.initial_min_curvature;
  summary["initial_neumann_defect"] = traj.initial_neumann_defect;
  json checks                       = json::array();
  for (const auto& c : result.warp_report.checks) {
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"observed_min", c.observed_min},
                      {"observed_max", c.observed_max},
                      {"worst_r", c.worst_r}});
  }
  summary["warp_validation"] = {{"pass", result.warp_report.pass()},
                                {"sample_range", {result.warp_report.sample_lo, result.warp_report.sample_hi}},
                                {"checks", checks}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");

  if (config.output.emit_fields) {
    for (const auto& snap : traj.snapshots) {
      write_file(dir / fmt::format("fields-{:.6f}.csv", snap.t()), fields_csv(snap));
    }
  }
  if (config.output.emit_plots) { write_file(dir / "plot_series.py", kPlotScript); }
}

int cmd_run(const ExperimentConfig& config, const std::string& out_dir) {
  RunResult result;
  try {
    result = run_experiment(config);
    write_outputs(config, result, out_dir.empty() ? config.output.directory : out_dir);
  } catch (const ConfigError& e) {
    log::error("{}", e.what());
    return kConfigError;
  }
  const auto& r = result.report;
  fmt::print("status {}  steps {}  lemma31 {}  lemma32 {}  lemma41 {}  area {}  H>0 {}\n",
             flow::to_string(result.trajectory.status), result.trajectory.steps,
             r.lemma31.pass ? "pass" : "FAIL", r.lemma32.pass ? "pass" : "FAIL",
             r.lemma41.pass ? "pass" : "FAIL", r.area_law.pass ? "pass" : "FAIL",
             r.h_positive ? "yes" : "NO");
  fmt::print("decay sup|Du| rate {:.6g} (r2 {:.6f})  roundness rate {:.6g} (r2 {:.6f})\n",
             r.du_fit.rate, r.du_fit.r_squared, r.roundness_fit.rate, r.roundness_fit.r_squared);
  return result.exit_code;
}

int cmd_validate_warp(const ExperimentConfig& config) {
  std::shared_ptr<const warp::WarpSpec> spec;
  try {
    spec = make_warp(config.warp);
  } catch (const ConfigError& e) {
    log::error("{}", e.what());
    return kConfigError;
  }
  const auto report = warp::validate(*spec);
  fmt::print("warp {}  alpha {}  C {}  samples {} on [{}, {}]\n", spec->name, spec->alpha,
             spec->c_bound, report.sample_count, report.sample_lo, report.sample_hi);
  for (const auto& c : report.checks) {
    fmt::print("  {:<24} {}  observed [{:.9g}, {:.9g}]  worst r {:.6g}\n", c.name,
               c.pass ? "pass" : "FAIL", c.observed_min, c.observed_max, c.worst_r);
  }
  return report.pass() ? kOk : kMonitorViolation;
}

ConvergenceResult convergence_study(const ExperimentConfig& config, const std::vector<int>& levels) {
  if (levels.size() < 3) {
    throw ConfigError(fmt::format("convergence needs at least 3 levels, got {}", levels.size()));
  }
  ConvergenceResult result;
  for (int nt : levels) {
    ConvergenceLevel level;
    level.n_theta = nt;

    ExperimentConfig radial    = config;
    radial.n_theta             = nt;
    radial.initial.amplitude   = 0.0;
    const auto radial_run      = run_experiment(radial);
    const auto spec            = radial_run.trajectory.front().state.chart().warp_ptr();
    const auto exact           = oracle::radial_solution(spec, config.r0, config.n);
    level.radial_error         = oracle::compare(radial_run.trajectory, exact).max_rel_error;

    ExperimentConfig perturbed = config;
    perturbed.n_theta          = nt;
    if (perturbed.initial.amplitude == 0.0) {
      perturbed.initial.shape     = "cosine-even";
      perturbed.initial.amplitude = 0.05 * config.r0;
    }
    const auto run   = run_experiment(perturbed);
    const auto& last = run.trajectory.back().state;
    level.h          = last.mesh().h_theta();
    level.functional = last.u()[last.mesh().index(nt - 1, 0)];
    level.status     = run.trajectory.status;
    if (level.status != flow::Status::completed) { result.exit_code = kSingularity; }
    result.max_radial_error = std::max(result.max_radial_error, level.radial_error);
    log::info("level n_theta={} h={:.6g} radial error {:.3e} functional {:.15g}", nt, level.h,
              level.radial_error, level.functional);
    result.levels.push_back(level);
  }
  const std::size_t m = result.levels.size();
  std::vector<double> h, q;
  for (std::size_t i = m - 3; i < m; ++i) {
    h.push_back(result.levels[i].h);
    q.push_back(result.levels[i].functional);
  }
  result.observed_order = diag::observed_order(h, q);
  if (result.exit_code == kOk &&
      !(result.observed_order >= 1.9 && result.max_radial_error < 1e-6)) {
    result.exit_code = kMonitorViolation;
  }
  return result;
}

int cmd_convergence(const ExperimentConfig& config, const std::vector<int>& levels,
                    const std::string& out_dir) {
  ConvergenceResult result;
  try {
    result = convergence_study(config, levels);
  } catch (const ConfigError& e) {
    log::error("{}", e.what());
    return kConfigError;
  }
  std::string table = "n_theta,h,radial_rel_error,functional\n";
  fmt::print("{:>8} {:>14} {:>16} {:>24}\n", "n_theta", "h", "radial rel err", "u(theta0, t_end)");
  for (const auto& l : result.levels) {
    table += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", l.n_theta, l.h, l.radial_error, l.functional);
    fmt::print("{:>8} {:>14.6e} {:>16.3e} {:>24.16g}\n", l.n_theta, l.h, l.radial_error, l.functional);
  }
  fmt::print("observed order {:.4f}\n", result.observed_order);
  const fs::path dir(out_dir.empty() ? config.output.directory : out_dir);
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) { throw ConfigError(fmt::format("cannot create '{}'", dir.string())); }
    write_file(dir / "convergence.csv", table);
    json j = {{"observed_order", result.observed_order},
              {"max_radial_error", result.max_radial_error},
              {"exit_code", result.exit_code}};
    write_file(dir / "convergence.json", j.dump(2) + "\n");
  } catch (const ConfigError& e) {
    log::error("{}", e.what());
    return kConfigError;
  }
  return result.exit_code;
}

int cmd_sweep(const std::vector<ExperimentConfig>& configs, const std::string& out_dir, int jobs) {
  if (configs.empty()) {
    log::error("sweep needs at least one config");
    return kConfigError;
  }
  jobs = std::max(1, jobs);
  const fs::path root(out_dir.empty() ? "imcf-sweep" : out_dir);
  std::vector<std::string> dirs;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto stem = fs::path(configs[i].source).stem().string();
    dirs.push_back((root / fmt::format("run-{:03d}-{}", i, stem.empty() ? "config" : stem)).string());
  }

  std::vector<int> codes(configs.size(), kOk);
  for (std::size_t start = 0; start < configs.size(); start += jobs) {
    std::vector<std::future<int>> batch;
    const std::size_t stop = std::min(configs.size(), start + static_cast<std::size_t>(jobs));
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                 [&, i] { return cmd_run(configs[i], dirs[i]); }));
    }
    for (std::size_t i = start; i < stop; ++i) { codes[i] = batch[i - start].get(); }
  }

  json runs = json::array();
  int first = kOk;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    runs.push_back({{"index", i}, {"source", configs[i].source}, {"directory", dirs[i]},
                    {"exit_code", codes[i]}});
    if (first == kOk && codes[i] != kOk) { first = codes[i]; }
  }
  try {
    std::error_code ec;
    fs::create_directories(root, ec);
    write_file(root / "sweep.json", json{{"runs", runs}, {"exit_code", first}}.dump(2) + "\n");
  } catch (const ConfigError& e) {
    log::error("{}", e.what());
    return kConfigError;
  }
  return first;
}

}  // namespace imcf::cli
