#include "dpnls/asymptotics.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpnls/error.hpp"
#include "dpnls/parallel.hpp"
#include "dpnls/quadrature.hpp"

namespace dpnls {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Ordinary least squares y ≈ a + b x.
std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {(sy - b * sx) / n, b};
}

double weight(int dim, double area, double r) { return area * (dim == 1 ? 1.0 : std::pow(r, dim - 1)); }

}  // namespace

DecayFit fit_tail(const RadialProfile& prof) {
  const auto& params = prof.params;
  if (prof.size() < 8) throw Error(ErrorKind::InsufficientSamples, "fit_tail: profile has too few nodes");
  DecayFit fit;
  if (params.omega > 0.0) {
    fit.exponential = true;
    fit.theory = {std::sqrt(params.omega), 0.0};
    // Far half of the grid, where the linearization at φ = 0 governs.
    fit.r_b = prof.r_max();
    fit.r_a = 0.5 * fit.r_b;
    std::vector<double> x, y;
    for (std::size_t i = 1; i < prof.size(); ++i) {
      if (prof.r[i] < fit.r_a) continue;
      x.push_back(prof.r[i]);
      y.push_back(std::log(prof.phi[i]) + 0.5 * (params.dim - 1) * std::log(prof.r[i]));
    }
    if (x.size() < 4) throw Error(ErrorKind::WindowNotFound, "fit_tail: no far-field nodes");
    const auto [a, b] = line_fit(x, y);
    fit.fitted_rate = -b;
    fit.coefficient = std::exp(a);
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - a - b * x[i], 2);
    fit.residual_rms = std::sqrt(ss / x.size());
    return fit;
  }
  fit.theory = expected_decay(params);
  if (params.dim > 2) fit.kappa = std::pow((params.dim - 2) / std::sqrt(2.0), params.dim - 2);
  const DecayWindow win = find_decay_window(prof);
  if (!win.stabilized) {
    throw Error(ErrorKind::WindowNotFound, "fit_tail: local exponent does not settle within 1% over any decade");
  }
  fit.r_a = win.r_lo;
  fit.r_b = win.r_hi;
  const auto pl = fit_power_law(prof, win.r_lo, win.r_hi, fit.theory.log_power);
  if (!pl) throw Error(ErrorKind::WindowNotFound, "fit_tail: window holds fewer than 4 nodes");
  fit.fitted_exponent = pl->first;
  fit.fitted_log_power = pl->second;
  // Intercept and residual of the fitted law on the same nodes.
  double sum = 0, ss = 0;
  std::size_t n = 0;
  std::vector<double> res;
  for (std::size_t i = 1; i < prof.size(); ++i) {
    const double r = prof.r[i];
    if (r < win.r_lo || r > win.r_hi || (fit.fitted_log_power > 0.0 && r <= std::exp(1.0))) continue;
    double model = -fit.fitted_exponent * std::log(r);
    if (fit.fitted_log_power > 0.0) model -= fit.fitted_log_power * std::log(std::log(r));
    res.push_back(std::log(prof.phi[i]) - model);
    sum += res.back();
    ++n;
  }
  const double intercept = sum / n;
  for (double v : res) ss += (v - intercept) * (v - intercept);
  fit.coefficient = std::exp(intercept);
  fit.residual_rms = std::sqrt(ss / n);
  return fit;
}

UniformBound uniform_bound_check(const ModelParams& params_template, const std::vector<double>& omega_grid,
                                 const ShootingConfig& cfg, const UniformBoundOptions& opts, int threads) {
  for (double w : omega_grid) {
    if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorKind::InvalidParams, "uniform_bound_check: omega must lie in [0, 1]");
  }
  if (!(opts.r_a > 0.0 && opts.r_b > opts.r_a) || opts.samples < 2) {
    throw Error(ErrorKind::InvalidParams, "uniform_bound_check: invalid window");
  }
  UniformBound out;
  out.omega = omega_grid;
  out.r_a = opts.r_a;
  out.r_b = opts.r_b;
  out.rho = params_template.rho();
  out.window_sup.assign(omega_grid.size(), 0.0);
  std::vector<std::string> errors(omega_grid.size());
  parallel_for(omega_grid.size(), threads, [&](std::size_t i) {
    ModelParams params = params_template;
    params.omega = omega_grid[i];
    try {
      const auto prof = solve_ground_state(params, cfg);
      double sup = 0.0;
      for (int k = 0; k < opts.samples; ++k) {
        const double r = opts.r_a * std::pow(opts.r_b / opts.r_a, k / (opts.samples - 1.0));
        sup = std::max(sup, evaluate(prof, r) * std::pow(r, out.rho));
      }
      out.window_sup[i] = sup;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(ErrorKind::StiffnessFailure, "uniform_bound_check: " + e);
  }
  for (double s : out.window_sup) out.C_hat = std::max(out.C_hat, s);
  return out;
}

DifferenceNorms difference_norms(const RadialProfile& u, const RadialProfile& v, double p) {
  const int dim = u.params.dim;
  const double area = u.params.sphere_area();
  std::vector<double> grid;
  grid.reserve(u.size() + v.size());
  std::merge(u.r.begin(), u.r.end(), v.r.begin(), v.r.end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t n = grid.size();
  std::vector<double> g(n), l(n), m(n);
  auto diff = [&](double r) { return evaluate(u, r) - evaluate(v, r); };
  auto ddiff = [&](double r) { return evaluate_derivative(u, r) - evaluate_derivative(v, r); };
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weight(dim, area, grid[i]);
    const double d = diff(grid[i]), dd = ddiff(grid[i]);
    g[i] = w * dd * dd;
    l[i] = w * std::pow(std::abs(d), p + 1.0);
    m[i] = w * d * d;
  }
  const double rb = grid.back();
  boost::math::quadrature::exp_sinh<double> far;
  auto tail = [&](auto&& f) { return far.integrate([&](double t) { return weight(dim, area, rb + t) * f(rb + t); }); };
  DifferenceNorms out;
  out.h1dot = std::sqrt(integrate_nonuniform(grid, g) + tail([&](double r) { return std::pow(ddiff(r), 2); }));
  out.lp1 = std::pow(integrate_nonuniform(grid, l) + tail([&](double r) { return std::pow(std::abs(diff(r)), p + 1.0); }),
                     1.0 / (p + 1.0));
  out.l2 = std::sqrt(integrate_nonuniform(grid, m) + tail([&](double r) { return std::pow(diff(r), 2); }));
  return out;
}

bool nonincreasing(const std::vector<double>& v, double tol) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] <= v[i - 1] * (1.0 + tol))) return false;
  }
  return true;
}

LimitStudy zero_mass_limit_study(const ModelParams& params_template, const std::vector<double>& omega_sequence,
                                 const ShootingConfig& cfg, int threads) {
  if (omega_sequence.empty()) throw Error(ErrorKind::InvalidParams, "zero_mass_limit_study: empty sequence");
  for (std::size_t i = 0; i < omega_sequence.size(); ++i) {
    if (!(omega_sequence[i] >= 1e-4)) {
      throw Error(ErrorKind::InvalidParams, "zero_mass_limit_study: frequencies must be >= 1e-4");
    }
    if (i > 0 && !(omega_sequence[i] < omega_sequence[i - 1])) {
      throw Error(ErrorKind::InvalidParams, "zero_mass_limit_study: sequence must decrease strictly");
    }
  }
  ModelParams p0 = params_template;
  p0.omega = 0.0;
  const auto phi0 = solve_ground_state(p0, cfg);
  const auto rep0 = compute_report(phi0, p0);
  const bool l2 = l2_membership(p0.dim, p0.p);

  const std::size_t n = omega_sequence.size();
  LimitStudy s;
  s.omega = omega_sequence;
  s.d0 = rep0.S;
  for (auto* col : {&s.delta_H1dot, &s.delta_Lp1, &s.delta_L2, &s.d_gap, &s.mass_times_omega, &s.identity_residual}) {
    col->assign(n, kNaN);
  }
  s.status.assign(n, "ok");
  parallel_for(n, threads, [&](std::size_t i) {
    ModelParams params = params_template;
    params.omega = omega_sequence[i];
    try {
      const auto prof = solve_ground_state(params, cfg);
      const auto rep = compute_report(prof, params);
      const auto d = difference_norms(prof, phi0, params.p);
      s.delta_H1dot[i] = d.h1dot;
      s.delta_Lp1[i] = d.lp1;
      if (l2) s.delta_L2[i] = d.l2;
      s.d_gap[i] = rep.S - rep0.S;
      s.mass_times_omega[i] = params.omega * rep.norms.L2_sq;
      const double k0 = rep.norms.gradL2_sq + rep.norms.Lp1 - rep.norms.Lq1;
      s.identity_residual[i] = std::abs(k0 + params.omega * rep.norms.L2_sq) / rep.norms.gradL2_sq;
    } catch (const Error& e) {
      s.status[i] = std::string(to_string(e.kind()));
    }
  });
  auto ok_only = [&](const std::vector<double>& col) {
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
      if (s.status[i] == "ok") out.push_back(col[i]);
    }
    return out;
  };
  s.delta_monotone = nonincreasing(ok_only(s.delta_H1dot), 0.05) && nonincreasing(ok_only(s.delta_Lp1), 0.05) &&
                     (!l2 || nonincreasing(ok_only(s.delta_L2), 0.05));
  s.mass_monotone = nonincreasing(ok_only(s.mass_times_omega));
  s.d_gap_monotone = nonincreasing(ok_only(s.d_gap));
  return s;
}

}  // namespace dpnls
