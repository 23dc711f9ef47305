#include "dpnls/functionals.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "dpnls/error.hpp"
#include "dpnls/parallel.hpp"
#include "dpnls/quadrature.hpp"

namespace dpnls {

namespace {

double half_line(const std::function<double(double)>& f) {
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f);
}

// ∫_{r_b}^∞ |S^{N−1}| r^{N−1} |φ|^m dr for the attached tail; nullopt if infinite.
std::optional<double> tail_power(const TailModel& tail, int dim, double area, double m, double rb) {
  switch (tail.kind) {
    case TailKind::None: return 0.0;
    case TailKind::Exponential:
      return area * half_line([&](double t) {
        const double r = rb + t;
        return std::pow(r, dim - 1) * std::pow(tail.value(r), m);
      });
    case TailKind::Algebraic: break;
  }
  // x = s r:  |S| s^{−N} c^m ∫_{x_b}^∞ x^{N−1−mρ} (log x)^{−mℓ} dx
  const double s = tail.r_scale;
  const double xb = s * rb;
  const double pre = area * std::pow(s, -dim) * std::pow(tail.coefficient, m);
  const double a = m * tail.exponent - dim;
  const double b = m * tail.log_power;
  if (b == 0.0) {
    if (!(a > 0.0)) return std::nullopt;
    return pre * std::pow(xb, -a) / a;
  }
  const double ub = std::log(xb);
  if (std::abs(a) <= 1e-12 * dim) {
    if (!(b > 1.0)) return std::nullopt;
    return pre * std::pow(ub, 1.0 - b) / (b - 1.0);
  }
  if (a < 0.0) return std::nullopt;
  return pre * half_line([&](double t) { return std::exp(-a * (ub + t)) * std::pow(ub + t, -b); });
}

double tail_gradient(const TailModel& tail, int dim, double area, double rb) {
  switch (tail.kind) {
    case TailKind::None: return 0.0;
    case TailKind::Exponential:
      return area * half_line([&](double t) {
        const double r = rb + t;
        const double d = tail.derivative(r);
        return std::pow(r, dim - 1) * d * d;
      });
    case TailKind::Algebraic: break;
  }
  const double s = tail.r_scale;
  const double xb = s * rb;
  const double rho = tail.exponent, ell = tail.log_power;
  const double pre = area * std::pow(s, 2 - dim) * tail.coefficient * tail.coefficient;
  const double a = 2.0 * rho + 2.0 - dim;
  if (!(a > 0.0)) throw Error(ErrorKind::DivergentNorm, "gradient norm of the tail diverges");
  if (ell == 0.0) return pre * rho * rho * std::pow(xb, -a) / a;
  const double ub = std::log(xb);
  return pre * half_line([&](double t) {
    const double u = ub + t;
    const double g = rho + ell / u;
    return std::exp(-a * u) * std::pow(u, -2.0 * ell) * g * g;
  });
}

double bracketed_root(const std::function<double(double)>& f, const char* what) {
  double lo = 1e-6, hi = 1e6;
  const double flo = f(lo), fhi = f(hi);
  if (!(flo > 0.0) || !(fhi < 0.0)) {
    throw Error(ErrorKind::NoRoot, std::string(what) + ": no sign change on [1e-6, 1e6]");
  }
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::min(std::abs(a), std::abs(b)); };
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (a + b);
}

}  // namespace

Norms compute_norms(const RadialProfile& profile, const QuadratureOptions& opts) {
  const auto& params = profile.params;
  const int dim = params.dim;
  const double area = params.sphere_area();
  const std::size_t n = profile.size();
  std::vector<double> w(n), l2(n), grad(n), lp(n), lq(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = area * (dim == 1 ? 1.0 : std::pow(profile.r[i], dim - 1));
    const double v = std::abs(profile.phi[i]);
    l2[i] = w[i] * v * v;
    grad[i] = w[i] * profile.dphi[i] * profile.dphi[i];
    lp[i] = w[i] * std::pow(v, params.p + 1.0);
    lq[i] = w[i] * std::pow(v, params.q + 1.0);
  }
  const double rb = profile.r_max();
  Norms out;
  out.gradL2_sq = integrate_nonuniform(profile.r, grad) + tail_gradient(profile.tail, dim, area, rb);
  auto with_tail = [&](const std::vector<double>& y, double m, bool& divergent) {
    double v = integrate_nonuniform(profile.r, y);
    if (auto t = tail_power(profile.tail, dim, area, m, rb)) {
      v += *t;
    } else {
      divergent = true;
    }
    return v;
  };
  bool lp_div = false, lq_div = false;
  out.L2_sq = with_tail(l2, 2.0, out.l2_divergent);
  out.Lp1 = with_tail(lp, params.p + 1.0, lp_div);
  out.Lq1 = with_tail(lq, params.q + 1.0, lq_div);
  if (lp_div || lq_div) throw Error(ErrorKind::DivergentNorm, "L^{p+1} or L^{q+1} norm of the tail diverges");
  if (out.l2_divergent && opts.strict) {
    throw Error(ErrorKind::DivergentNorm, "L2 norm diverges under the algebraic tail model");
  }
  return out;
}

FunctionalReport report_from_norms(const Norms& n, const ModelParams& params) {
  const double p1 = params.p + 1.0, q1 = params.q + 1.0;
  // ω·‖v‖² is dropped at ω = 0 so that a divergent mass does not leak in.
  const double mass_term = params.omega > 0.0 ? params.omega * n.L2_sq : 0.0;
  FunctionalReport r;
  r.norms = n;
  r.S = 0.5 * n.gradL2_sq + 0.5 * mass_term + n.Lp1 / p1 - n.Lq1 / q1;
  r.K = n.gradL2_sq + mass_term + n.Lp1 - n.Lq1;
  r.J = (0.5 - 1.0 / q1) * (n.gradL2_sq + mass_term) + (1.0 / p1 - 1.0 / q1) * n.Lp1;
  r.P = n.gradL2_sq + params.alpha() * n.Lp1 / p1 - params.beta() * n.Lq1 / q1;
  r.pohozaev_residual_K = r.K / n.gradL2_sq;
  r.pohozaev_residual_P = r.P / n.gradL2_sq;
  return r;
}

FunctionalReport compute_report(const RadialProfile& profile, const ModelParams& params,
                                const QuadratureOptions& opts) {
  params.validate();
  RadialProfile prof = profile;
  prof.params = params;
  return report_from_norms(compute_norms(prof, opts), params);
}

double nehari_at(const Norms& n, const ModelParams& params, double lambda) {
  const double mass_term = params.omega > 0.0 ? params.omega * n.L2_sq : 0.0;
  return lambda * lambda * (n.gradL2_sq + mass_term) + std::pow(lambda, params.p + 1.0) * n.Lp1 -
         std::pow(lambda, params.q + 1.0) * n.Lq1;
}

double nehari_at_l2_scaling(const Norms& n, const ModelParams& params, double lambda) {
  const double mass_term = params.omega > 0.0 ? params.omega * n.L2_sq : 0.0;
  return lambda * lambda * n.gradL2_sq + mass_term + std::pow(lambda, params.alpha()) * n.Lp1 -
         std::pow(lambda, params.beta()) * n.Lq1;
}

double nehari_rescale(const Norms& n, const ModelParams& params) {
  const double mass_term = params.omega > 0.0 ? params.omega * n.L2_sq : 0.0;
  // K(λv)/λ² is strictly decreasing in λ, so the positive root is unique.
  return bracketed_root(
      [&](double l) {
        return n.gradL2_sq + mass_term + std::pow(l, params.p - 1.0) * n.Lp1 - std::pow(l, params.q - 1.0) * n.Lq1;
      },
      "nehari_rescale");
}

double nehari_rescale(const RadialProfile& profile, const ModelParams& params) {
  return nehari_rescale(compute_report(profile, params).norms, params);
}

double virial_scaling_root(const Norms& n, const ModelParams& params) {
  const double beta = params.beta();
  if (std::abs(beta - 2.0) <= 1e-12 * 2.0) {
    const double P = report_from_norms(n, params).P;
    if (P > 0.0) throw Error(ErrorKind::HypothesisViolated, "mass-critical q requires P(v) <= 0");
  }
  const double scale = std::max({n.gradL2_sq, n.Lp1, n.Lq1});
  // Dividing by λ^β makes the function monotone whenever β ≥ 2.
  return bracketed_root(
      [&](double l) { return nehari_at_l2_scaling(n, params, l) * std::pow(l, -beta) / scale; },
      "virial_scaling_root");
}

double virial_scaling_root(const RadialProfile& profile, const ModelParams& params) {
  return virial_scaling_root(compute_report(profile, params).norms, params);
}

DCurve d_curve(const std::vector<double>& omega_grid, const ModelParams& params_template, const ShootingConfig& cfg,
               int threads) {
  for (std::size_t i = 0; i < omega_grid.size(); ++i) {
    if (!(omega_grid[i] >= 0.0)) throw Error(ErrorKind::InvalidParams, "d_curve: frequencies must be >= 0");
    if (i > 0 && omega_grid[i] < omega_grid[i - 1]) {
      throw Error(ErrorKind::InvalidParams, "d_curve: frequency grid must be sorted ascending");
    }
  }
  const std::size_t n = omega_grid.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DCurve c;
  c.omega = omega_grid;
  c.d_values.assign(n, nan);
  c.mass_values.assign(n, nan);
  c.mass_divergent.assign(n, false);
  c.status.assign(n, "ok");
  std::vector<char> divergent(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    ModelParams params = params_template;
    params.omega = omega_grid[i];
    try {
      const auto prof = solve_ground_state(params, cfg);
      const auto rep = compute_report(prof, params);
      c.d_values[i] = rep.S;
      c.mass_values[i] = rep.norms.L2_sq;
      divergent[i] = rep.norms.l2_divergent;
    } catch (const Error& e) {
      c.status[i] = std::string(to_string(e.kind()));
    }
  });
  for (std::size_t i = 0; i < n; ++i) c.mass_divergent[i] = divergent[i] != 0;
  c.strictly_increasing = true;
  c.positive = true;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (c.status[i] != "ok") continue;
    if (!(c.d_values[i] > prev)) c.strictly_increasing = false;
    if (!(c.d_values[i] > 0.0)) c.positive = false;
    prev = c.d_values[i];
  }
  return c;
}

StraussMargin strauss_bound_check(const RadialProfile& profile, const ModelParams& params) {
  const auto rep = compute_report(profile, params);
  const double p3 = params.p + 3.0;
  const double a = 2.0 * (params.dim - 1) / p3;
  StraussMargin out;
  out.rhs = std::pow(rep.norms.Lp1 * rep.norms.gradL2_sq, 1.0 / p3);
  auto visit = [&](double r, double v) {
    const double lhs = (a == 0.0 ? 1.0 : std::pow(r, a)) * std::abs(v);
    if (lhs > out.sup_lhs) {
      out.sup_lhs = lhs;
      out.r_at_sup = r;
    }
  };
  for (std::size_t i = 0; i < profile.size(); ++i) visit(profile.r[i], profile.phi[i]);
  // The weight grows, so the far field is scanned as well.
  const double rb = profile.r_max();
  for (int k = 1; k <= 200; ++k) {
    const double r = rb * std::pow(10.0, k / 50.0);
    visit(r, profile.tail.value(r));
  }
  out.margin = out.rhs - out.sup_lhs;
  const double c = p3 / (2.0 * params.sphere_area());
  out.corrected_margin = std::pow(c, 2.0 / p3) * out.rhs - out.sup_lhs;
  return out;
}

}  // namespace dpnls
