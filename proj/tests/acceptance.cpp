// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dpnls/cli.hpp"
#include "dpnls/error.hpp"
#include "dpnls/parallel.hpp"
#include "oracles.hpp"

using namespace dpnls;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int threads() { return static_cast<int>(std::max(2u, std::thread::hardware_concurrency())); }

// Margins from every ground state computed by the other criteria.
struct StraussLog {
  std::mutex mu;
  double worst = std::numeric_limits<double>::infinity();
  std::string worst_case;
  int count = 0, failing = 0, corrected_failing = 0;

  void add(const RadialProfile& prof) {
    const auto m = strauss_bound_check(prof, prof.params);
    std::lock_guard lock(mu);
    ++count;
    if (m.margin < -1e-8) ++failing;
    if (m.corrected_margin < -1e-8) ++corrected_failing;
    if (m.margin < worst) {
      worst = m.margin;
      std::ostringstream os;
      os << "(N=" << prof.params.dim << ",p=" << prof.params.p << ",q=" << prof.params.q
         << ",w=" << prof.params.omega << ")";
      worst_case = os.str();
    }
  }
} strauss;

Outcome amplitude_oracle() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> up(1.2, 4.0), gap(0.3, 3.0), om(0.0, 2.0);
  double worst = 0;
  for (int i = 0; i < 10; ++i) {
    const double p = up(rng), q = p + gap(rng), w = om(rng);
    const auto prof = solve_ground_state({1, p, q, w});
    strauss.add(prof);
    worst = std::max(worst, std::abs(prof.amplitude() - oracle::first_integral_amplitude(p, q, w)));
  }
  return {worst <= 1e-8, "max |s - s_oracle| = " + fmt("%.2e", worst) + " over 10 triples"};
}

Outcome pohozaev_suite() {
  std::vector<ModelParams> cases;
  for (int n : {1, 2, 3}) {
    for (auto [p, q] : {std::pair{2.0, 3.0}, {1.5, 4.0}, {3.5, 4.0}}) {
      for (double w : {0.0, 0.1, 1.0}) cases.push_back({n, p, q, w});
    }
  }
  std::vector<double> res(cases.size(), HUGE_VAL);
  std::vector<std::string> err(cases.size());
  parallel_for(cases.size(), threads(), [&](std::size_t i) {
    try {
      const auto prof = solve_ground_state(cases[i]);
      strauss.add(prof);
      const auto r = compute_report(prof, cases[i]);
      res[i] = std::max(std::abs(r.pohozaev_residual_K), std::abs(r.pohozaev_residual_P));
    } catch (const std::exception& e) {
      err[i] = e.what();
    }
  });
  const double worst = *std::max_element(res.begin(), res.end());
  std::string detail = "max(|K|,|P|)/|grad phi|^2 = " + fmt("%.2e", worst) + " over 27 states";
  for (const auto& e : err) {
    if (!e.empty()) detail += "; failure: " + e;
  }
  return {worst <= 1e-6, detail};
}

Outcome gamma_exactness() {
  double worst = std::max({std::abs(gamma_curve(1, 1.0) - 5.0), std::abs(gamma_curve(1, 2.0) - 3.4),
                           std::abs(p_threshold(1) - (4.0 * std::sqrt(2.0) - 3.0)), std::abs(p_threshold(2) - 2.0)});
  for (int n = 1; n <= 5; ++n) worst = std::max(worst, std::abs(gamma_curve(n, p_threshold(n)) - p_threshold(n)));
  return {worst <= 1e-10, "max error " + fmt("%.1e", worst)};
}

Outcome sign_equivalence() {
  struct Grid {
    int dim;
    std::vector<double> p, q;
  };
  const std::vector<Grid> grids = {{1, {1.5, 2.0, 2.5, 3.0, 3.5}, {2.5, 3.5, 4.5}},
                                   {2, {1.2, 1.5, 1.8}, {2.2, 2.6, 2.9}},
                                   {3, {1.2, 1.5, 1.8}, {2.0, 2.3}}};
  int total = 0, outside = 0, agree = 0, failed = 0;
  double worst_fd = 0;
  for (const auto& g : grids) {
    std::vector<std::pair<double, double>> pq;
    for (double p : g.p) {
      for (double q : g.q) {
        if (q > p) pq.emplace_back(p, q);
      }
    }
    for (const auto& r : sign_equivalence_sweep(g.dim, pq, {}, threads())) {
      ++total;
      if (r.status != "ok") {
        ++failed;
        continue;
      }
      // On the curve the closed form vanishes and a relative error means nothing.
      if (!r.near_degenerate) {
        worst_fd = std::max(worst_fd, r.fd_relative_error);
        ++outside;
        if (r.sign_closed_form == r.sign_gamma_test) ++agree;
      }
    }
  }
  std::ostringstream os;
  os << total << " pairs, " << agree << "/" << outside << " signs agree outside the band, " << failed
     << " failed, " << total - failed - outside << " in the band, max FD rel. error outside it "
     << fmt("%.1e", worst_fd);
  return {total >= 20 && failed == 0 && agree == outside && worst_fd <= 1e-4, os.str()};
}

Outcome d_monotone() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.1 * i);
  bool ok = true;
  std::ostringstream os;
  for (const ModelParams& m : {ModelParams{1, 2.0, 3.0, 0.0}, {1, 3.0, 5.0, 0.0}, {3, 2.0, 3.0, 0.0}}) {
    const DCurve d = d_curve(grid, m, {}, threads());
    const bool good = d.strictly_increasing && d.d_values.front() > 0.0 &&
                      std::all_of(d.status.begin(), d.status.end(), [](const auto& s) { return s == "ok"; });
    ok = ok && good;
    os << "(N=" << m.dim << ",p=" << m.p << ",q=" << m.q << ") d(0)=" << fmt("%.4g", d.d_values.front())
       << (good ? " increasing; " : " NOT increasing; ");
  }
  return {ok, os.str()};
}

Outcome zero_mass() {
  const auto s = zero_mass_limit_study({1, 3.0, 5.0, 0.0}, {0.5, 0.1, 0.02, 0.004}, {}, threads());
  const bool mono = nonincreasing(s.delta_H1dot) && nonincreasing(s.delta_Lp1);
  const double h1 = s.delta_H1dot.back(), lp = s.delta_Lp1.back();
  const double ident = *std::max_element(s.identity_residual.begin(), s.identity_residual.end());
  const bool mass = nonincreasing(s.mass_times_omega);
  std::ostringstream os;
  os << "H1dot " << fmt("%.4f", h1) << ", L^{p+1} " << fmt("%.4f", lp) << " (need < 0.05), monotone "
     << (mono ? "yes" : "no") << ", identity " << fmt("%.1e", ident) << ", w|phi|^2 decreasing "
     << (mass ? "yes" : "no");
  return {mono && h1 < 0.05 && lp < 0.05 && ident <= 1e-6 && mass, os.str()};
}

Outcome decay_fits() {
  const ModelParams a{1, 3.0, 5.0, 0.0}, b{3, 3.5, 4.0, 0.0}, c{1, 2.0, 3.0, 0.25};
  RadialProfile pa = solve_ground_state(a), pb = solve_ground_state(b), pc = solve_ground_state(c);
  strauss.add(pa);
  strauss.add(pb);
  strauss.add(pc);
  const double ea = std::abs(fit_tail(pa).fitted_exponent - 1.0);
  const double eb = std::abs(fit_tail(pb).fitted_exponent - 1.0);
  const double ec = std::abs(fit_tail(pc).fitted_rate - 0.5) / 0.5;
  return {std::max({ea, eb, ec}) <= 0.02, "relative errors " + fmt("%.2e", ea) + ", " + fmt("%.2e", eb) + ", " +
                                              fmt("%.2e", ec)};
}

Outcome conservation() {
  const ModelParams m{1, 2.0, 3.0, 1.0};
  const auto prof = solve_ground_state(m);
  const WaveField u0 = make_initial_data(InitialKind::AmplitudeScaled, prof, 1.01, 0.0, 64.0, 1024);
  EvolutionConfig cfg;
  cfg.t_end = 5.0;
  cfg.diagnostics_every = 10;
  const auto d = evolve(u0, m, cfg).diag;
  double de = 0, dm = 0;
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    de = std::max(de, std::abs(d.E[i] - d.E[0]) / std::abs(d.E[0]));
    dm = std::max(dm, std::abs(d.M[i] - d.M[0]) / d.M[0]);
  }
  const double vir = virial_consistency(d);
  return {!d.blowup_flag && de <= 1e-8 && dm <= 1e-10 && vir <= 1e-3 && d.final_time >= 5.0 - 1e-9,
          "E drift " + fmt("%.1e", de) + ", M drift " + fmt("%.1e", dm) + ", virial residual " + fmt("%.1e", vir)};
}

Outcome strong_instability() {
  const ModelParams m{1, 2.0, 5.0, 1.0};
  const auto prof = solve_ground_state(m);
  const double mu = compute_report(prof, m).S;
  const WaveField u0 = make_initial_data(InitialKind::AmplitudeScaled, prof, 1.1, 0.0, 24.0, 2048);
  const auto q0 = measure(u0, m);
  const double s0 = q0.energy + 0.5 * m.omega * q0.mass;
  EvolutionConfig cfg;
  cfg.t_end = 1.0;
  cfg.diagnostics_every = 1;
  cfg.max_grid_size = 1 << 20;
  const auto d = evolve(u0, m, cfg).diag;
  const double bound = 16.0 * (s0 - mu) + 1e-3;
  double max8p = -HUGE_VAL, max_vdd = -HUGE_VAL;
  for (double p : d.P) max8p = std::max(max8p, 8.0 * p);
  // Second differences over the uniformly spaced samples (the last one may be a partial step).
  for (std::size_t i = 1; i + 2 < d.t.size(); ++i) {
    const double h = d.t[i + 1] - d.t[i];
    max_vdd = std::max(max_vdd, (d.V[i + 1] - 2 * d.V[i] + d.V[i - 1]) / (h * h));
  }
  const double ratio = d.final_grad_norm / d.grad_norm.front();
  const bool ok = d.blowup_flag && d.blowup_time && ratio >= 1e3 && max8p <= bound && max_vdd <= bound;
  std::ostringstream os;
  os << "blowup flag " << (d.blowup_flag ? "set" : "not set");
  if (d.blowup_time) os << " at t=" << fmt("%.5f", *d.blowup_time);
  os << ", grad ratio " << fmt("%.0f", ratio) << ", max 8P " << fmt("%.3f", max8p) << ", max FD V'' "
     << fmt("%.3f", max_vdd) << " <= " << fmt("%.3f", bound);
  return {ok, os.str()};
}

Outcome small_omega() {
  const ModelParams m{1, 2.0, 4.8, 0.01};
  const auto prof = solve_ground_state(m);
  EscapeConfig cfg;
  cfg.lambda = 1.01;
  cfg.R = 100;
  cfg.L = 250;
  cfg.M = 8192;
  cfg.evolution.dt = 2.5e-3;
  cfg.evolution.t_end = 10.0;
  cfg.evolution.diagnostics_every = 40;
  const auto run = instability_escape_test(m, prof, cfg);
  cfg.lambda = 1.0;
  const auto control = instability_escape_test(m, prof, cfg);
  const bool ok = run.escape_time && run.max_distance_ratio >= 3.0 && run.min_neg_P_in_tube > 0.0 &&
                  !control.escape_time;
  std::ostringstream os;
  os << "lambda=1.01: ";
  if (run.escape_time) os << "escape at t=" << fmt("%.2f", *run.escape_time);
  else os << "no escape";
  os << " (ratio " << fmt("%.2f", run.max_distance_ratio) << "), min -P in tube " << fmt("%.2e", run.min_neg_P_in_tube)
     << "; control lambda=1: max ratio " << fmt("%.3f", control.max_distance_ratio)
     << (control.escape_time ? ", escaped" : ", no escape");
  return {ok, os.str()};
}

Outcome strauss_margin() {
  std::ostringstream os;
  os << strauss.failing << "/" << strauss.count << " states below -1e-8; worst margin " << fmt("%.4f", strauss.worst)
     << " at " << strauss.worst_case << "; with the corrected constant " << strauss.corrected_failing << "/"
     << strauss.count << " below";
  return {strauss.count > 0 && strauss.failing == 0, os.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "dpnls_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << json{{"functionals", {{"omega_grid", {0.0, 0.5, 1.0}}}},
                             {"stability", {{"pq_grid", {{2.0, 3.0}, {2.0, 4.5}}}}},
                             {"zero_mass", {{"omega_sequence", {0.5, 0.1}}}},
                             {"evolution", {{"t_end", 0.5}, {"snapshot_times", {0.25}}}}}
                            .dump();
  const std::vector<std::vector<std::string>> cmds = {
      {"groundstate"}, {"functionals"}, {"stability-map"}, {"decay-fit"}, {"zero-mass"},
      {"evolve", "--preset", "stationary"}};
  int files = 0, mismatches = 0, parse_failures = 0, bad_exits = 0;
  for (const auto& c : cmds) {
    std::vector<fs::path> dirs;
    for (const char* tag : {"a", "b"}) {
      const fs::path out = root / (c[0] + "_" + tag);
      std::vector<std::string> args = c;
      args.insert(args.end(), {"--config", cfg.string(), "--out", out.string(), "--plot-data"});
      std::ostringstream o, e;
      if (cli::run(args, o, e) != cli::kExitOk) ++bad_exits;
      dirs.push_back(out);
    }
    for (const auto& entry : fs::recursive_directory_iterator(dirs[0])) {
      if (!entry.is_regular_file()) continue;
      const fs::path rel = fs::relative(entry.path(), dirs[0]);
      ++files;
      try {
        if (rel.extension() == ".csv") {
          const CsvTable t = read_csv(entry.path());
          for (const auto& h : t.header) {
            if (h != "status" && h != "series" && h != "mass_divergent" && h != "blowup_flag" && h != "agreement" &&
                h != "near_degenerate")
              t.numeric_column(h);
          }
        } else {
          if (read_json(entry.path()).at("format_version") != kFormatVersion) ++parse_failures;
        }
      } catch (const std::exception&) {
        ++parse_failures;
      }
      if (rel == "manifest.json") {
        json a = read_json(entry.path()), b = read_json(dirs[1] / rel);
        a.erase("wall_time_s");
        b.erase("wall_time_s");
        if (a != b) ++mismatches;
      } else if (slurp(entry.path()) != slurp(dirs[1] / rel)) {
        ++mismatches;
      }
    }
  }
  std::ostringstream os;
  os << files << " files from " << cmds.size() << " commands: " << mismatches << " differ between runs, "
     << parse_failures << " fail to parse, " << bad_exits << " nonzero exits";
  return {files > 0 && mismatches == 0 && parse_failures == 0 && bad_exits == 0, os.str()};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"amplitude oracle", 10, amplitude_oracle},
      {"Pohozaev identities", 60, pohozaev_suite},
      {"boundary curve exactness", 1, gamma_exactness},
      {"sign equivalence", 300, sign_equivalence},
      {"d(omega) monotone", 120, d_monotone},
      {"zero-mass limit", 120, zero_mass},
      {"decay fits", 60, decay_fits},
      {"conservation and virial", 60, conservation},
      {"strong instability", 120, strong_instability},
      {"small-omega escape", 300, small_omega},
      {"pointwise radial bound", 1, strauss_margin},
      {"determinism and schema", 300, determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over time budget";
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << i + 1 << ". " << c.name << ": " << o.detail << " ("
              << fmt("%.1f", secs) << " s)" << std::endl;
  }
  std::cout << criteria.size() - failures << "/" << criteria.size() << " criteria pass" << std::endl;
  return failures == 0 ? 0 : 1;
}
