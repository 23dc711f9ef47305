#include "dpnls/cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <thread>

#include "dpnls/error.hpp"

namespace dpnls::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::InvalidParams, msg); }

json evolution_defaults() {
  const EvolutionConfig e;
  return {{"initial", "amplitude"},
          {"lambda", 1.0},
          {"R", 0.0},
          {"L", 32.0},
          {"M", 1024},
          {"dt", e.dt},
          {"t_end", e.t_end},
          {"diagnostics_every", e.diagnostics_every},
          {"blowup_factor", e.blowup_factor},
          {"dt_floor", e.dt_floor},
          {"energy_jump_tol", e.energy_jump_tol},
          {"adaptive", e.adaptive},
          {"splitting_order", e.splitting_order},
          {"max_grid_size", 0},
          {"spectral_tail_tol", e.spectral_tail_tol},
          {"snapshot_times", json::array()},
          {"escape", {{"enabled", false}, {"escape_factor", 3.0}, {"distance_floor", 1e-3}}}};
}

json default_pq_grid() {
  json grid = json::array();
  for (double p : {1.5, 2.0, 2.5, 3.0}) {
    for (double q : {3.0, 3.5, 4.0, 4.5}) {
      if (q > p) grid.push_back({p, q});
    }
  }
  return grid;
}

bool same_kind(const json& def, const json& val) {
  if (def.is_number_float()) return val.is_number();
  if (def.is_number_integer()) return val.is_number_integer();
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_string()) return val.is_string();
  if (def.is_array()) return val.is_array();
  if (def.is_object()) return val.is_object();
  return true;
}

// Recursive overlay; arrays replace wholesale.
void overlay(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) invalid("config: " + (where.empty() ? std::string("top level") : where) + " must be an object");
  for (const auto& [key, val] : patch.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) invalid("config: unknown key '" + path + "'");
    json& slot = base[key];
    if (!same_kind(slot, val)) invalid("config: '" + path + "' has the wrong type");
    if (slot.is_object()) overlay(slot, val, path);
    else slot = val;
  }
}

json read_config_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) invalid("cannot read config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    invalid("config file " + path.string() + ": " + e.what());
  }
}

int thread_count() {
  const char* env = std::getenv("DPNLS_THREADS");
  if (env == nullptr || *env == '\0') return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096) invalid("DPNLS_THREADS must be a positive integer");
  return static_cast<int>(n);
}

// Holds `.lock` in the output directory for the lifetime of the run.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) invalid("output directory " + dir.string() + " is locked by another run (remove .lock if stale)");
  }
  ~DirLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

struct Options {
  std::optional<std::string> config_file;
  std::optional<std::string> preset;
  std::optional<std::string> out;
  bool strict = false;
  bool plot_data = false;
};

// Long-format rows (series, x, y) for external plotting.
struct PlotData {
  CsvTable table{{"series", "x", "y"}, {}};
  void add(const std::string& series, double x, double y) {
    table.add_row({series, format_double(x), format_double(y)});
  }
};

struct Context {
  json cfg;
  Options opts;
  fs::path out;
  int threads = 1;
  std::vector<std::string> outputs;
  json checks = json::object();
  PlotData plot;
  std::ostream* log = nullptr;

  void csv(const std::string& name, const CsvTable& t) {
    fs::create_directories((out / name).parent_path());
    write_csv(out / name, t);
    outputs.push_back(name);
  }
  void doc(const std::string& name, json j) {
    write_json(out / name, std::move(j));
    outputs.push_back(name);
  }
};

ModelParams model_params(const json& cfg) {
  ModelParams m = params_from_json(cfg.at("model"));
  m.validate();
  return m;
}

ShootingConfig shooting(const json& cfg) {
  ShootingConfig s = shooting_from_json(cfg.at("shooting"));
  s.validate();
  return s;
}

QuadratureOptions quadrature(const json& cfg) { return {cfg.at("quadrature").at("strict").get<bool>()}; }

double rel(double a, double scale) { return scale != 0.0 ? std::abs(a) / std::abs(scale) : std::abs(a); }

json regime_json(const ModelParams& params) {
  const RegimeLabel label = classify_regime(params);
  return {{"tag", to_string(label.tag)}, {"citation", label.citation}};
}

int cmd_groundstate(Context& c) {
  const ModelParams params = model_params(c.cfg);
  const RadialProfile prof = solve_ground_state(params, shooting(c.cfg));
  const FunctionalReport rep = compute_report(prof, params, quadrature(c.cfg));
  const double tol = c.cfg.at("tolerances").at("pohozaev").get<double>();
  const bool ok_k = std::abs(rep.pohozaev_residual_K) <= tol;
  const bool ok_p = std::abs(rep.pohozaev_residual_P) <= tol;
  c.checks["pohozaev_K"] = ok_k;
  c.checks["pohozaev_P"] = ok_p;

  c.csv("profile.csv", profile_table(prof));
  c.doc("profile.meta.json", {{"params", to_json(params)},
                              {"shooting", c.cfg.at("shooting")},
                              {"solve", to_json(prof.info)},
                              {"tail", to_json(prof.tail)},
                              {"points", prof.size()},
                              {"r_max", prof.r_max()}});
  c.doc("report.json", {{"params", to_json(params)},
                        {"amplitude", prof.amplitude()},
                        {"report", to_json(rep)},
                        {"pohozaev_tolerance", tol},
                        {"pohozaev_K_ok", ok_k},
                        {"pohozaev_P_ok", ok_p},
                        {"strauss", to_json(strauss_bound_check(prof, params))},
                        {"regime", regime_json(params)}});
  if (c.opts.plot_data) {
    for (std::size_t i = 0; i < prof.size(); ++i) {
      c.plot.add("phi", prof.r[i], prof.phi[i]);
      c.plot.add("dphi", prof.r[i], prof.dphi[i]);
    }
  }
  return kExitOk;
}

int cmd_functionals(Context& c) {
  const ModelParams params = model_params(c.cfg);
  const ShootingConfig sc = shooting(c.cfg);
  const RadialProfile prof = solve_ground_state(params, sc);
  const FunctionalReport rep = compute_report(prof, params, quadrature(c.cfg));
  const auto lambdas = c.cfg.at("functionals").at("lambda_grid").get<std::vector<double>>();
  if (lambdas.empty()) invalid("functionals.lambda_grid is empty");
  const ScalingCurve curve = scaling_curve(rep.norms, params, lambdas);
  const CriterionResult crit = instability_criterion(rep.norms, params);

  json out = {{"params", to_json(params)},
              {"amplitude", prof.amplitude()},
              {"report", to_json(rep)},
              {"scaling",
               {{"first_derivative_at_1", curve.first_deriv_at_1},
                {"second_derivative_at_1", curve.second_deriv_at_1},
                {"closed_form_second_derivative", curve.closed_form_second_deriv},
                {"general_second_derivative", curve.general_second_deriv},
                {"P", curve.P}}},
              {"instability_criterion", to_json(crit)},
              {"strauss", to_json(strauss_bound_check(prof, params))},
              {"regime", regime_json(params)}};
  try {
    out["nehari_rescale"] = nehari_rescale(rep.norms, params);
  } catch (const Error& e) {
    out["nehari_rescale"] = nullptr;
  }
  try {
    out["virial_scaling_root"] = virial_scaling_root(rep.norms, params);
  } catch (const Error& e) {
    out["virial_scaling_root"] = nullptr;
  }

  CsvTable scaling{{"lambda", "S"}, {}};
  for (std::size_t i = 0; i < curve.lambda.size(); ++i) {
    scaling.add_row({format_double(curve.lambda[i]), format_double(curve.S_values[i])});
    if (c.opts.plot_data) c.plot.add("S_lambda", curve.lambda[i], curve.S_values[i]);
  }

  const auto omegas = c.cfg.at("functionals").at("omega_grid").get<std::vector<double>>();
  if (!omegas.empty()) {
    const DCurve d = d_curve(omegas, params, sc, c.threads);
    CsvTable t{{"omega", "d", "mass", "mass_divergent", "status"}, {}};
    for (std::size_t i = 0; i < d.omega.size(); ++i) {
      t.add_row({format_double(d.omega[i]), format_double(d.d_values[i]), format_double(d.mass_values[i]),
                 d.mass_divergent[i] ? "true" : "false", d.status[i]});
      if (c.opts.plot_data) c.plot.add("d_omega", d.omega[i], d.d_values[i]);
    }
    c.csv("d_curve.csv", t);
    out["d_curve"] = {{"strictly_increasing", d.strictly_increasing}, {"positive", d.positive}};
    c.checks["d_strictly_increasing"] = d.strictly_increasing;
    c.checks["d_positive"] = d.positive;
  }
  c.checks["first_derivative_vanishes"] = std::abs(curve.first_deriv_at_1) <= 1e-6 * rep.norms.gradL2_sq;
  c.csv("scaling.csv", scaling);
  c.doc("functionals.json", out);
  return kExitOk;
}

int cmd_stability_map(Context& c) {
  const json& st = c.cfg.at("stability");
  const int dim = st.at("dim").get<int>();
  if (dim < 1) invalid("stability.dim must be positive");
  const double band = st.at("band").get<double>();
  std::vector<std::pair<double, double>> grid;
  for (const auto& pq : st.at("pq_grid")) {
    if (!pq.is_array() || pq.size() != 2 || !pq[0].is_number() || !pq[1].is_number()) {
      invalid("stability.pq_grid entries must be [p, q] pairs");
    }
    grid.emplace_back(pq[0].get<double>(), pq[1].get<double>());
  }
  if (grid.empty()) invalid("stability.pq_grid is empty");
  for (const auto& [p, q] : grid) {
    ModelParams{dim, p, q, 0.0}.validate();
    if (!(q < 1.0 + 4.0 / dim)) invalid("stability.pq_grid: the sign test needs q < 1+4/N");
  }

  const auto rows = sign_equivalence_sweep(dim, grid, shooting(c.cfg), c.threads, band);
  c.csv("sweep.csv", sweep_table(rows));

  const double pn = p_threshold(dim);
  json poly = json::array();
  const int n = 64;
  for (int i = 0; i <= n; ++i) {
    const double p = 1.0 + (pn - 1.0) * i / n;
    const double g = gamma_curve(dim, p);
    poly.push_back({p, g});
    if (c.opts.plot_data) c.plot.add("gamma", p, g);
  }
  std::size_t ok = 0, outside = 0, agree = 0;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    ++ok;
    if (!r.near_degenerate) {
      ++outside;
      if (r.sign_closed_form == r.sign_gamma_test) ++agree;
    }
    if (c.opts.plot_data) c.plot.add(r.sign_closed_form < 0 ? "unstable" : "not_unstable", r.p, r.q);
  }
  const double ok_fraction = static_cast<double>(ok) / static_cast<double>(rows.size());
  c.checks["rows_ok_fraction_at_least_0.9"] = ok_fraction >= 0.9;
  c.checks["sign_agreement_outside_band"] = agree == outside;
  c.doc("regions.json", {{"dim", dim},
                         {"p_threshold", pn},
                         {"mass_critical_exponent", 1.0 + 4.0 / dim},
                         {"boundary", poly},
                         {"band", band},
                         {"rows", rows.size()},
                         {"rows_ok", ok},
                         {"rows_outside_band", outside},
                         {"sign_agreements_outside_band", agree}});
  return ok_fraction >= 0.9 ? kExitOk : kExitNumerical;
}

int cmd_decay_fit(Context& c) {
  const ModelParams params = model_params(c.cfg);
  const RadialProfile prof = solve_ground_state(params, shooting(c.cfg));
  const DecayFit fit = fit_tail(prof);
  json j = {{"params", to_json(params)}, {"fit", to_json(fit)}};
  double err = 0.0;
  if (fit.exponential) err = rel(fit.fitted_rate - fit.theory.exponent, fit.theory.exponent);
  else err = rel(fit.fitted_exponent - fit.theory.exponent, fit.theory.exponent);
  j["relative_error"] = err;
  c.checks["within_2_percent"] = err <= 0.02;
  if (c.opts.plot_data) {
    for (std::size_t i = 0; i < prof.size(); ++i) {
      if (prof.r[i] >= fit.r_a && prof.r[i] <= fit.r_b) c.plot.add("phi_window", prof.r[i], prof.phi[i]);
    }
  }
  c.doc("decay.json", j);
  return kExitOk;
}

int cmd_zero_mass(Context& c) {
  const ModelParams params = model_params(c.cfg);
  const auto seq = c.cfg.at("zero_mass").at("omega_sequence").get<std::vector<double>>();
  if (seq.empty()) invalid("zero_mass.omega_sequence is empty");
  const LimitStudy s = zero_mass_limit_study(params, seq, shooting(c.cfg), c.threads);
  c.csv("limit.csv", limit_table(s));
  c.checks["delta_monotone"] = s.delta_monotone;
  c.checks["mass_monotone"] = s.mass_monotone;
  c.checks["d_gap_monotone"] = s.d_gap_monotone;
  if (c.opts.plot_data) {
    for (std::size_t i = 0; i < s.omega.size(); ++i) {
      c.plot.add("delta_H1dot", s.omega[i], s.delta_H1dot[i]);
      c.plot.add("delta_Lp1", s.omega[i], s.delta_Lp1[i]);
      c.plot.add("mass_times_omega", s.omega[i], s.mass_times_omega[i]);
    }
  }
  const auto ok = std::count(s.status.begin(), s.status.end(), "ok");
  return ok > 0 ? kExitOk : kExitNumerical;
}

EvolutionConfig evolution_config(const json& e) {
  EvolutionConfig cfg;
  cfg.dt = e.at("dt").get<double>();
  cfg.t_end = e.at("t_end").get<double>();
  cfg.diagnostics_every = e.at("diagnostics_every").get<int>();
  cfg.blowup_factor = e.at("blowup_factor").get<double>();
  cfg.dt_floor = e.at("dt_floor").get<double>();
  cfg.energy_jump_tol = e.at("energy_jump_tol").get<double>();
  cfg.adaptive = e.at("adaptive").get<bool>();
  cfg.splitting_order = e.at("splitting_order").get<int>();
  const long grid = e.at("max_grid_size").get<long>();
  if (grid < 0) invalid("evolution.max_grid_size must be nonnegative");
  cfg.max_grid_size = static_cast<std::size_t>(grid);
  cfg.spectral_tail_tol = e.at("spectral_tail_tol").get<double>();
  cfg.snapshot_times = e.at("snapshot_times").get<std::vector<double>>();
  return cfg;
}

double max_of(const std::vector<double>& v) {
  double m = -HUGE_VAL;
  for (double x : v) m = std::max(m, x);
  return m;
}

double max_drift(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, rel(x - v.front(), v.front()));
  return m;
}

int cmd_evolve(Context& c) {
  const ModelParams params = model_params(c.cfg);
  const json& e = c.cfg.at("evolution");
  const InitialKind kind = initial_kind_from_string(e.at("initial").get<std::string>());
  const double lambda = e.at("lambda").get<double>();
  const double R = e.at("R").get<double>();
  const double L = e.at("L").get<double>();
  const long M = e.at("M").get<long>();
  if (M < 8) invalid("evolution.M must be a power of two >= 8");
  const EvolutionConfig ecfg = evolution_config(e);
  const json& esc = e.at("escape");
  const bool escape = esc.at("enabled").get<bool>();
  if (escape && kind != InitialKind::CutoffL2Scaled) invalid("escape test uses initial = \"cutoff_l2\"");

  const RadialProfile prof = solve_ground_state(params, shooting(c.cfg));
  const FunctionalReport gs = compute_report(prof, params, quadrature(c.cfg));
  const RegimeLabel regime = classify_regime(params);

  json summary = {{"params", to_json(params)},
                  {"initial", to_string(kind)},
                  {"lambda", lambda},
                  {"regime", {{"tag", to_string(regime.tag)}, {"citation", regime.citation}}},
                  {"ground_state_action", gs.S}};
  EvolutionDiagnostics diag;
  std::vector<WaveField> snaps;
  std::optional<WaveField> final_field;
  std::string outcome;

  if (escape) {
    EscapeConfig cfg;
    cfg.lambda = lambda;
    cfg.R = R;
    cfg.L = L;
    cfg.M = static_cast<std::size_t>(M);
    cfg.escape_factor = esc.at("escape_factor").get<double>();
    cfg.distance_floor = esc.at("distance_floor").get<double>();
    cfg.evolution = ecfg;
    EscapeReport rep = instability_escape_test(params, prof, cfg);
    outcome = rep.escape_time ? "escape observed" : "no escape within t_end";
    summary["escape"] = {{"initial_distance", rep.initial_distance},
                         {"reference_distance", rep.reference_distance},
                         {"escape_factor", cfg.escape_factor},
                         {"escape_time", rep.escape_time ? json(*rep.escape_time) : json(nullptr)},
                         {"max_distance_ratio", rep.max_distance_ratio},
                         {"min_neg_P_in_tube", rep.min_neg_P_in_tube}};
    c.checks["virial_negative_in_tube"] = rep.min_neg_P_in_tube > 0.0;
    diag = std::move(rep.diag);
    snaps = std::move(rep.snapshots);
  } else {
    const std::size_t m = static_cast<std::size_t>(M);
    const WaveField u0 = make_initial_data(kind, prof, lambda, R, L, m);
    const bool cut = kind == InitialKind::CutoffAmplitudeScaled || kind == InitialKind::CutoffL2Scaled;
    const WaveField ref = make_initial_data(cut ? InitialKind::CutoffAmplitudeScaled : InitialKind::AmplitudeScaled,
                                            prof, 1.0, R, L, m);
    const FieldQuantities q0 = measure(u0, params);
    const double S0 = q0.energy + 0.5 * params.omega * q0.mass;
    EvolveResult run = evolve(u0, params, ecfg, &ref);
    diag = std::move(run.diag);
    snaps = std::move(run.snapshots);
    final_field = std::move(run.field);

    const double max_dist = max_of(diag.distance);
    summary["max_distance"] = max_dist;
    summary["initial_action"] = S0;
    if (diag.blowup_flag) outcome = "blowup detected";
    else if (max_dist <= 1e-6) outcome = "orbit preserved";
    else outcome = "completed";

    // d²V/dt² = 8P is bounded by 16(S(u₀) − μ) along the flow when S(u₀) < μ and P(u₀) < 0.
    const double bound = 16.0 * (S0 - gs.S);
    double max8p = -HUGE_VAL;
    for (double p : diag.P) max8p = std::max(max8p, 8.0 * p);
    summary["virial_bound"] = {{"bound", bound}, {"max_8P", max8p}};
    if (regime.tag == Regime::StronglyUnstable && S0 < gs.S) c.checks["virial_bound"] = max8p <= bound + 1e-3;
    if (!diag.blowup_flag) {
      summary["energy_drift"] = max_drift(diag.E);
      summary["mass_drift"] = max_drift(diag.M);
    }
    try {
      // A blowup run ends with a short irregular step; drop it.
      EvolutionDiagnostics d = diag;
      if (d.blowup_flag && d.t.size() > 6) {
        for (auto* v : {&d.t, &d.E, &d.M, &d.P, &d.V, &d.grad_norm, &d.distance}) v->pop_back();
      }
      summary["virial_consistency"] = virial_consistency(d);
    } catch (const Error&) {
      summary["virial_consistency"] = nullptr;
    }
  }

  summary["outcome"] = outcome;
  const std::string text = regime.citation.empty() ? outcome : outcome + " (" + regime.citation + ")";
  summary["summary"] = text;
  summary["blowup_flag"] = diag.blowup_flag;
  summary["blowup_time"] = diag.blowup_time ? json(*diag.blowup_time) : json(nullptr);
  summary["stop_reason"] = diag.stop_reason;
  summary["final_time"] = diag.final_time;
  summary["final_grad_norm"] = diag.final_grad_norm;
  summary["substeps"] = diag.substeps;
  summary["min_substep"] = diag.min_substep;
  summary["final_grid_size"] = diag.final_grid_size;
  summary["max_boundary_mass"] = diag.max_boundary_mass;
  c.checks["boundary_mass_below_1e-6"] = diag.max_boundary_mass <= 1e-6;

  c.csv("diag.csv", diagnostics_table(diag));
  json snap_list = json::array();
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "snapshots/snapshot_%03zu.csv", i);
    c.csv(name, field_table(snaps[i]));
    snap_list.push_back({{"file", name}, {"t", snaps[i].t}});
  }
  if (final_field) {
    c.csv("snapshots/final.csv", field_table(*final_field));
    snap_list.push_back({{"file", "snapshots/final.csv"}, {"t", final_field->t}});
  }
  summary["snapshots"] = snap_list;
  if (c.opts.plot_data) {
    for (std::size_t i = 0; i < diag.t.size(); ++i) {
      c.plot.add("grad_norm", diag.t[i], diag.grad_norm[i]);
      c.plot.add("distance", diag.t[i], diag.distance[i]);
      c.plot.add("P", diag.t[i], diag.P[i]);
      c.plot.add("V", diag.t[i], diag.V[i]);
    }
  }
  c.doc("summary.json", summary);
  *c.log << text << '\n';
  return kExitOk;
}

using Command = std::function<int(Context&)>;

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> m = {
      {"groundstate", cmd_groundstate}, {"functionals", cmd_functionals}, {"stability-map", cmd_stability_map},
      {"decay-fit", cmd_decay_fit},     {"zero-mass", cmd_zero_mass},     {"evolve", cmd_evolve},
  };
  return m;
}

json error_json(const std::string& kind, const std::string& msg, int code) {
  return {{"format_version", kFormatVersion}, {"kind", kind}, {"message", msg}, {"exit_code", code}};
}

int run_command(const std::string& name, const Options& opts, std::ostream& out, std::ostream& err) {
  json cfg = resolve_config(opts.preset, opts.config_file ? std::optional<fs::path>(*opts.config_file) : std::nullopt);
  if (opts.strict) cfg["quadrature"]["strict"] = true;

  if (name == "defaults") {
    out << cfg.dump(2) << '\n';
    if (opts.out) {
      fs::create_directories(*opts.out);
      write_json(fs::path(*opts.out) / "defaults.json", cfg);
    }
    return kExitOk;
  }

  if (!opts.out) invalid("--out DIR is required");
  Context c;
  c.cfg = cfg;
  c.opts = opts;
  c.out = *opts.out;
  c.threads = thread_count();
  c.log = &out;
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) invalid("cannot create output directory " + c.out.string());
  DirLock lock(c.out);

  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    code = commands().at(name)(c);
  } catch (const Error& e) {
    code = is_validation_error(e.kind()) ? kExitValidation : kExitNumerical;
    write_json(c.out / "error.json", error_json(std::string(to_string(e.kind())), e.what(), code));
    err << "error: " << e.what() << '\n';
    return code;
  }
  if (opts.plot_data) c.csv("plot_data.csv", c.plot.table);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::sort(c.outputs.begin(), c.outputs.end());
  json inputs = json::object();
  inputs["config_file"] = opts.config_file ? json(*opts.config_file) : json(nullptr);
  inputs["preset"] = opts.preset ? json(*opts.preset) : json(nullptr);
  write_json(c.out / "manifest.json", {{"command", name},
                                       {"config_hash", hex64(fnv1a64(cfg.dump()))},
                                       {"config", cfg},
                                       {"inputs", inputs},
                                       {"outputs", c.outputs},
                                       {"wall_time_s", wall},
                                       {"threads", c.threads},
                                       {"software_version", kSoftwareVersion},
                                       {"checks", c.checks},
                                       {"exit_code", code}});
  return code;
}

}  // namespace

json default_config() {
  return {{"format_version", kFormatVersion},
          {"seed", 0},
          {"model", to_json(ModelParams{1, 3.0, 5.0, 0.0})},
          {"shooting", to_json(ShootingConfig{})},
          {"quadrature", {{"strict", false}}},
          {"functionals",
           {{"lambda_grid", {0.8, 0.85, 0.9, 0.95, 1.0, 1.05, 1.1, 1.15, 1.2}}, {"omega_grid", json::array()}}},
          {"stability", {{"dim", 1}, {"pq_grid", default_pq_grid()}, {"band", 0.02}}},
          {"zero_mass", {{"omega_sequence", {0.5, 0.1, 0.02, 0.004}}}},
          {"evolution", evolution_defaults()},
          {"tolerances", {{"pohozaev", 1e-6}}}};
}

std::vector<std::string> preset_names() { return {"small-omega", "stationary", "strong-instability"}; }

json preset(const std::string& name) {
  if (name == "strong-instability") {
    return {{"model", to_json(ModelParams{1, 2.0, 5.0, 1.0})},
            {"evolution",
             {{"initial", "amplitude"},
              {"lambda", 1.1},
              {"L", 24.0},
              {"M", 2048},
              {"dt", 1e-3},
              {"t_end", 1.0},
              {"diagnostics_every", 1},
              {"max_grid_size", 1 << 20},
              {"spectral_tail_tol", 1e-5}}}};
  }
  if (name == "stationary") {
    return {{"model", to_json(ModelParams{1, 2.0, 3.0, 1.0})},
            {"evolution",
             {{"initial", "amplitude"},
              {"lambda", 1.0},
              {"L", 32.0},
              {"M", 1024},
              {"dt", 1e-3},
              {"t_end", 5.0},
              {"diagnostics_every", 10}}}};
  }
  if (name == "small-omega") {
    return {{"model", to_json(ModelParams{1, 2.0, 4.8, 0.01})},
            {"evolution",
             {{"initial", "cutoff_l2"},
              {"lambda", 1.01},
              {"R", 100.0},
              {"L", 250.0},
              {"M", 8192},
              {"dt", 2.5e-3},
              {"t_end", 10.0},
              {"diagnostics_every", 40},
              {"escape", {{"enabled", true}}}}}};
  }
  invalid("unknown preset '" + name + "'");
}

json resolve_config(const std::optional<std::string>& preset_name,
                    const std::optional<fs::path>& config_file) {
  json cfg = default_config();
  if (preset_name) overlay(cfg, preset(*preset_name), "");
  if (config_file) overlay(cfg, read_config_file(*config_file), "");
  if (cfg.at("format_version").get<int>() != kFormatVersion) {
    invalid("config format_version " + cfg.at("format_version").dump() + " is not supported (expected " +
            std::to_string(kFormatVersion) + ")");
  }
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical lab for NLS with competing powers"};
  app.require_subcommand(1);
  Options opts;
  std::string config, preset_name, out_dir;
  app.add_option("--config", config, "JSON config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--preset", preset_name, "named preset")->check(CLI::IsMember(preset_names()));
  app.add_flag("--strict", opts.strict, "divergent norms become errors");
  app.add_flag("--plot-data", opts.plot_data, "also write plot_data.csv in long format");
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"groundstate", "solve for the ground state and check Pohozaev identities"},
      {"functionals", "action, scaling curve, instability criterion"},
      {"stability-map", "sign test of the instability criterion over a (p, q) grid"},
      {"decay-fit", "far-field fit of the ground state"},
      {"zero-mass", "convergence of ground states as omega -> 0"},
      {"evolve", "split-step time evolution"},
      {"defaults", "print the resolved configuration"}};
  for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << error_json("InvalidParams", e.what(), kExitValidation).dump() << '\n';
    return kExitValidation;
  }
  if (!config.empty()) opts.config_file = config;
  if (!preset_name.empty()) opts.preset = preset_name;
  if (!out_dir.empty()) opts.out = out_dir;
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    return run_command(name, opts, out, err);
  } catch (const Error& e) {
    const int code = is_validation_error(e.kind()) ? kExitValidation : kExitNumerical;
    err << error_json(std::string(to_string(e.kind())), e.what(), code).dump() << '\n';
    return code;
  } catch (const json::exception& e) {
    err << error_json("InvalidParams", std::string("config: ") + e.what(), kExitValidation).dump() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << error_json("Internal", e.what(), kExitNumerical).dump() << '\n';
    return kExitNumerical;
  }
}

}  // namespace dpnls::cli
