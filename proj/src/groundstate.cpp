#include "dpnls/groundstate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <sstream>

#include "dpnls/error.hpp"
#include "dpnls/rk45.hpp"

namespace dpnls {

namespace {

using Real = long double;
using State = std::array<Real, 2>;

// φ'' = ωφ + |φ|^{p−1}φ − |φ|^{q−1}φ − (N−1)/r φ'
struct RadialRhs {
  int dim;
  Real omega, p, q;

  Real source(Real phi) const {
    const Real a = std::fabs(phi);
    if (a == 0) return 0;
    const Real nl = std::pow(a, p) - std::pow(a, q);
    return omega * phi + (phi > 0 ? nl : -nl);
  }

  State operator()(Real r, const State& y) const {
    Real d2 = source(y[0]);
    if (dim > 1) d2 -= (dim - 1) * y[1] / r;
    return {y[1], d2};
  }
};

RadialRhs make_rhs(const ModelParams& params) {
  return {params.dim, params.omega, params.p, params.q};
}

// Fixed, amplitude-independent mesh: the discrete trajectory is then a smooth
// function of the amplitude, so bisection resolves the discrete separatrix to
// working precision.
struct Mesh {
  double h0;
  double stretch_radius;
  double h_cap;

  // Geometric start near the origin (N ≥ 2) keeps steps small against the 1/r term.
  double origin_scale;

  double step(double r) const {
    double h = std::min(h0 * std::max(1.0, r / stretch_radius), h_cap);
    if (origin_scale > 0.0) h = std::min(h, std::max(0.1 * r, origin_scale));
    return h;
  }
};

Mesh make_mesh(const ModelParams& params, const ShootingConfig& cfg, double h0) {
  double cap = 1e300;
  if (params.omega > 0.0) cap = 0.05 / std::sqrt(params.omega);
  return {h0, cfg.stretch_radius, std::max(cap, h0), params.dim > 1 ? cfg.origin_offset : 0.0};
}

struct Start {
  Real r;
  State y;
};

Start origin_data(const RadialRhs& rhs, Real amplitude, const ShootingConfig& cfg) {
  if (rhs.dim == 1) return {0, {amplitude, 0}};
  // Regular expansion φ = s + f(s) r²/(2N) + O(r⁴).
  const Real eps = cfg.origin_offset;
  const Real f = rhs.source(amplitude);
  return {eps, {amplitude + f * eps * eps / (2 * rhs.dim), f * eps / rhs.dim}};
}

double error_ratio(const State& y, const State& err, const ShootingConfig& cfg) {
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double scale = cfg.ode_atol + cfg.ode_rtol * static_cast<double>(std::fabs(y[i]));
    worst = std::max(worst, static_cast<double>(std::fabs(err[i])) / scale);
  }
  return worst;
}

bool finite(const State& y) { return std::isfinite(static_cast<double>(y[0])) && std::isfinite(static_cast<double>(y[1])); }

[[noreturn]] void stiffness(double r) {
  std::ostringstream os;
  os << "non-finite state in radial integration at r = " << r;
  throw Error(ErrorKind::StiffnessFailure, os.str());
}

// Algebraic (ω = 0) trajectories separate from the ground state only polynomially, so
// classification runs far past r_max on the stretched mesh before calling a tie.
constexpr double kClassifyReach = 1e8;

Trajectory classify_on_mesh(Real amplitude, const RadialRhs& rhs, const ShootingConfig& cfg, const Mesh& mesh,
                            bool fast_decay) {
  auto [r, y] = origin_data(rhs, amplitude, cfg);
  const double reach = rhs.omega > 0 ? cfg.r_max : cfg.r_max * kClassifyReach;
  // For ω = 0, N ≥ 3, p ≥ p* undershoots never turn around; they fall onto the slow
  // r^{-2/(p-1)} branch instead, which shows up as −rφ'/φ dropping back below N−2.
  const Real fast = rhs.dim - 2;
  bool armed = false;
  State err{};
  while (true) {
    if (y[0] <= 0) return Trajectory::Overshoot;
    if (r > 0 && y[1] > 0) return Trajectory::Undershoot;
    if (fast_decay && r > 0) {
      const Real e = -r * y[1] / y[0];
      if (e > fast) armed = true;
      else if (armed) return Trajectory::Undershoot;
    }
    if (r >= reach) return fast_decay && !armed ? Trajectory::Undershoot : Trajectory::Converged;
    // Past r_max only the sign of the departure matters; a coarser stretch suffices.
    Real h = mesh.step(static_cast<double>(r));
    if (r > cfg.r_max) h = std::max(h, Real(0.02) * r);
    y = detail::dopri5_step(rhs, r, y, h, err);
    r += h;
    if (!finite(y)) stiffness(static_cast<double>(r));
  }
}

bool fast_decay_branch(const ModelParams& params) {
  const auto ps = params.p_star();
  return params.omega == 0.0 && ps && (params.p > *ps || is_log_critical(params));
}

struct Bracket {
  Real lo;
  Real hi;
  int steps = 0;
};

Bracket bisect(const RadialRhs& rhs, const ShootingConfig& cfg, const Mesh& mesh, bool fast_decay) {
  Real lo = cfg.amp_lo;
  Real hi = cfg.amp_hi;
  int expansions = 0;
  while (true) {
    const auto c = classify_on_mesh(lo, rhs, cfg, mesh, fast_decay);
    if (c == Trajectory::Converged) return {lo, lo};
    if (c == Trajectory::Undershoot) break;
    if (++expansions > cfg.max_expansions) {
      throw Error(ErrorKind::BracketFailure, "no undershooting amplitude found below the bracket");
    }
    hi = lo;
    lo /= 2;
  }
  expansions = 0;
  while (true) {
    const auto c = classify_on_mesh(hi, rhs, cfg, mesh, fast_decay);
    if (c == Trajectory::Converged) return {hi, hi};
    if (c == Trajectory::Overshoot) break;
    if (++expansions > cfg.max_expansions) {
      throw Error(ErrorKind::BracketFailure, "no overshooting amplitude found above the bracket");
    }
    lo = hi;
    hi *= 2;
  }
  Bracket b{lo, hi};
  while (b.hi - b.lo > cfg.bisection_tol * b.hi) {
    const Real mid = b.lo + (b.hi - b.lo) / 2;
    if (mid <= b.lo || mid >= b.hi) break;
    ++b.steps;
    switch (classify_on_mesh(mid, rhs, cfg, mesh, fast_decay)) {
      case Trajectory::Overshoot: b.hi = mid; break;
      case Trajectory::Undershoot: b.lo = mid; break;
      case Trajectory::Converged: b.lo = b.hi = mid; return b;
    }
  }
  return b;
}

struct Track {
  std::vector<double> r, phi, dphi;
  double max_error_ratio = 0.0;
};

// Integrates both bracketing trajectories and keeps the stretch on which they
// agree, are positive and strictly decreasing.
Track trace(const RadialRhs& rhs, const Bracket& b, const ShootingConfig& cfg, const Mesh& mesh) {
  Track t;
  auto lo = origin_data(rhs, b.lo, cfg);
  auto hi = origin_data(rhs, b.hi, cfg);
  const Real s = (b.lo + b.hi) / 2;
  t.r.push_back(0.0);
  t.phi.push_back(static_cast<double>(s));
  t.dphi.push_back(0.0);
  Real r = lo.r;
  State ylo = lo.y, yhi = hi.y, err{};
  while (true) {
    const Real mean = (ylo[0] + yhi[0]) / 2;
    const bool descending = r == 0 || (ylo[1] < 0 && yhi[1] < 0);
    const bool ok = ylo[0] > 0 && yhi[0] > 0 && descending &&
                    std::fabs(yhi[0] - ylo[0]) <= cfg.agreement_tol * mean;
    if (!ok) break;
    if (r > 0) {
      t.r.push_back(static_cast<double>(r));
      t.phi.push_back(static_cast<double>(mean));
      t.dphi.push_back(static_cast<double>((ylo[1] + yhi[1]) / 2));
    }
    if (r >= cfg.r_max) break;
    if (rhs.omega > 0 && mean < cfg.decay_floor * s) break;
    const Real h = mesh.step(static_cast<double>(r));
    ylo = detail::dopri5_step(rhs, r, ylo, h, err);
    t.max_error_ratio = std::max(t.max_error_ratio, error_ratio(ylo, err, cfg));
    yhi = detail::dopri5_step(rhs, r, yhi, h, err);
    r += h;
    if (!finite(ylo) || !finite(yhi)) stiffness(static_cast<double>(r));
  }
  return t;
}

// Least squares for y ≈ X·β with a handful of regressors (normal equations).
std::vector<double> least_squares(const std::vector<std::vector<double>>& cols, const std::vector<double>& y) {
  const std::size_t k = cols.size();
  std::vector<double> a(k * k, 0.0), rhs(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t n = 0; n < y.size(); ++n) a[i * k + j] += cols[i][n] * cols[j][n];
    }
    for (std::size_t n = 0; n < y.size(); ++n) rhs[i] += cols[i][n] * y[n];
  }
  // Gaussian elimination with partial pivoting.
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::abs(a[r * k + c]) > std::abs(a[piv * k + c])) piv = r;
    }
    if (piv != c) {
      for (std::size_t j = 0; j < k; ++j) std::swap(a[c * k + j], a[piv * k + j]);
      std::swap(rhs[c], rhs[piv]);
    }
    for (std::size_t r = c + 1; r < k; ++r) {
      const double m = a[r * k + c] / a[c * k + c];
      for (std::size_t j = c; j < k; ++j) a[r * k + j] -= m * a[c * k + j];
      rhs[r] -= m * rhs[c];
    }
  }
  std::vector<double> x(k);
  for (std::size_t c = k; c-- > 0;) {
    double acc = rhs[c];
    for (std::size_t j = c + 1; j < k; ++j) acc -= a[c * k + j] * x[j];
    x[c] = acc / a[c * k + c];
  }
  return x;
}

}  // namespace

std::optional<std::pair<double, double>> fit_power_law(const RadialProfile& prof, double r_lo, double r_hi,
                                                       double log_power_hint) {
  const bool log_fit = log_power_hint > 0.0;
  // log log r needs r > e to stay real and away from its singularity.
  const double ra = log_fit ? std::max(r_lo, std::exp(1.0)) : r_lo;
  std::vector<double> ones, lx, llx, ly;
  for (std::size_t i = 1; i < prof.size(); ++i) {
    if (prof.r[i] < ra || prof.r[i] > r_hi) continue;
    ones.push_back(1.0);
    lx.push_back(std::log(prof.r[i]));
    llx.push_back(std::log(std::log(prof.r[i])));
    ly.push_back(std::log(prof.phi[i]));
  }
  if (ly.size() < 4) return std::nullopt;
  if (!log_fit) {
    const auto beta = least_squares({ones, lx}, ly);
    return std::pair{-beta[1], 0.0};
  }
  auto beta = least_squares({ones, lx, llx}, ly);
  const double lp = std::clamp(-beta[2], 0.5 * log_power_hint, 1.5 * log_power_hint);
  std::vector<double> shifted(ly.size());
  for (std::size_t i = 0; i < ly.size(); ++i) shifted[i] = ly[i] + lp * llx[i];
  beta = least_squares({ones, lx}, shifted);
  return std::pair{-beta[1], lp};
}

DecayWindow find_decay_window(const RadialProfile& prof, double rel_spread) {
  const double rb = prof.r_max();
  const double first = prof.size() > 1 ? prof.r[1] : rb;
  DecayWindow fallback{std::max(rb / 10.0, first), rb, 0.0, false};
  auto spread_on = [&](double lo, double hi) {
    double emin = 1e300, emax = -1e300;
    for (std::size_t i = 1; i < prof.size(); ++i) {
      if (prof.r[i] < lo || prof.r[i] > hi) continue;
      const double e = -prof.r[i] * prof.dphi[i] / prof.phi[i];
      emin = std::min(emin, e);
      emax = std::max(emax, e);
    }
    if (emax < emin) return 1e300;
    return (emax - emin) / std::max(0.5 * (emax + emin), 1e-300);
  };
  fallback.spread = spread_on(fallback.r_lo, fallback.r_hi);
  if (rb < 10.0 * first) return fallback;
  // Slide the decade inward in steps of 10^{1/20}.
  const double step = std::pow(10.0, 0.05);
  for (double hi = rb; hi >= 10.0 * first; hi /= step) {
    const double s = spread_on(hi / 10.0, hi);
    if (s <= rel_spread) return {hi / 10.0, hi, s, true};
  }
  return fallback;
}

namespace {

void attach_tail(RadialProfile& prof) {
  const auto& params = prof.params;
  const double rb = prof.r_max();
  const double phib = prof.phi.back();
  TailModel tail;
  tail.dim = params.dim;
  if (params.omega > 0.0) {
    tail.kind = TailKind::Exponential;
    tail.rate = std::sqrt(params.omega);
    tail.coefficient = phib * std::pow(rb, (params.dim - 1) / 2.0) * std::exp(tail.rate * rb);
    prof.info.tail_window_lo = rb;
    prof.info.tail_window_hi = rb;
    prof.info.tail_stabilized = true;
    prof.tail = tail;
    return;
  }
  const TailLaw law = expected_decay(params);
  tail.kind = TailKind::Algebraic;
  tail.exponent = law.exponent;
  tail.log_power = law.log_power;
  const DecayWindow win = find_decay_window(prof);
  prof.info.tail_window_lo = win.r_lo;
  prof.info.tail_window_hi = win.r_hi;
  prof.info.tail_stabilized = win.stabilized;
  const auto fit = fit_power_law(prof, win.r_lo, win.r_hi, law.log_power);
  if (fit) {
    tail.exponent = fit->first;
    tail.log_power = fit->second;
  }
  tail.coefficient = phib * std::pow(rb, tail.exponent);
  if (tail.log_power != 0.0) tail.coefficient *= std::pow(std::log(rb), tail.log_power);
  prof.tail = tail;
}

}  // namespace

std::string to_string(TailKind kind) {
  switch (kind) {
    case TailKind::None: return "none";
    case TailKind::Exponential: return "exponential";
    case TailKind::Algebraic: return "algebraic";
  }
  return "none";
}

std::string to_string(Trajectory t) {
  switch (t) {
    case Trajectory::Overshoot: return "Overshoot";
    case Trajectory::Undershoot: return "Undershoot";
    case Trajectory::Converged: return "Converged";
  }
  return "Converged";
}

double TailModel::value(double r) const {
  const double x = r * r_scale;
  switch (kind) {
    case TailKind::None: return 0.0;
    case TailKind::Exponential: return coefficient * std::pow(x, -(dim - 1) / 2.0) * std::exp(-rate * x);
    case TailKind::Algebraic: {
      double v = coefficient * std::pow(x, -exponent);
      if (log_power != 0.0) v *= std::pow(std::log(x), -log_power);
      return v;
    }
  }
  return 0.0;
}

double TailModel::derivative(double r) const {
  const double x = r * r_scale;
  switch (kind) {
    case TailKind::None: return 0.0;
    case TailKind::Exponential: return r_scale * value(r) * (-(dim - 1) / (2.0 * x) - rate);
    case TailKind::Algebraic: {
      double logd = -exponent / x;
      if (log_power != 0.0) logd -= log_power / (x * std::log(x));
      return r_scale * value(r) * logd;
    }
  }
  return 0.0;
}

void ShootingConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::InvalidParams, "shooting config: " + m); };
  if (!(amp_lo > 0.0) || !(amp_lo < amp_hi)) bad("require 0 < amp_lo < amp_hi");
  if (!(ode_atol > 0.0) || !(ode_rtol > 0.0)) bad("ODE tolerances must be positive");
  if (!(bisection_tol > 0.0)) bad("bisection tolerance must be positive");
  if (!(origin_offset > 0.0)) bad("origin offset must be positive");
  if (!(mesh_h0 > 0.0) || !(stretch_radius > 0.0)) bad("mesh spacing must be positive");
  if (!(r_max > 10.0 * mesh_h0)) bad("r_max too small for the mesh");
  if (!(agreement_tol > 0.0) || !(decay_floor > 0.0)) bad("agreement and decay tolerances must be positive");
}

Trajectory classify_trajectory(double amplitude, const ModelParams& params, const ShootingConfig& cfg) {
  params.validate();
  cfg.validate();
  if (!(amplitude > 0.0)) throw Error(ErrorKind::InvalidParams, "amplitude must be positive");
  const auto rhs = make_rhs(params);
  return classify_on_mesh(amplitude, rhs, cfg, make_mesh(params, cfg, cfg.mesh_h0), fast_decay_branch(params));
}

RadialProfile solve_ground_state(const ModelParams& params, const ShootingConfig& cfg) {
  params.validate();
  cfg.validate();
  const auto rhs = make_rhs(params);
  double h0 = cfg.mesh_h0;
  for (int refinement = 0;; ++refinement) {
    const Mesh mesh = make_mesh(params, cfg, h0);
    const Bracket b = bisect(rhs, cfg, mesh, fast_decay_branch(params));
    Track track = trace(rhs, b, cfg, mesh);
    const bool accurate = track.max_error_ratio <= 1.0;
    if (!accurate && refinement < cfg.max_mesh_refinements) {
      h0 /= 2;
      continue;
    }
    if (track.r.size() < 8) {
      throw Error(ErrorKind::StiffnessFailure, "shooting trajectories separated before a usable profile formed");
    }
    RadialProfile prof;
    prof.params = params;
    prof.r = std::move(track.r);
    prof.phi = std::move(track.phi);
    prof.dphi = std::move(track.dphi);
    prof.info.amplitude = (b.lo + b.hi) / 2;
    prof.info.bracket_width = static_cast<double>(b.hi - b.lo);
    prof.info.bisection_steps = b.steps;
    prof.info.mesh_refinements = refinement;
    prof.info.mesh_h0 = h0;
    prof.info.max_error_ratio = track.max_error_ratio;
    attach_tail(prof);
    return prof;
  }
}

namespace {

std::size_t interval(const RadialProfile& prof, double r) {
  auto it = std::upper_bound(prof.r.begin(), prof.r.end(), r);
  std::size_t i = static_cast<std::size_t>(it - prof.r.begin());
  return std::clamp<std::size_t>(i, 1, prof.size() - 1) - 1;
}

}  // namespace

double evaluate(const RadialProfile& prof, double r) {
  if (r >= prof.r_max()) return r == prof.r_max() ? prof.phi.back() : prof.tail.value(r);
  if (r <= prof.r.front()) return prof.phi.front();
  const std::size_t i = interval(prof, r);
  const double h = prof.r[i + 1] - prof.r[i];
  const double t = (r - prof.r[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * prof.phi[i] + (t3 - 2 * t2 + t) * h * prof.dphi[i] +
                   (-2 * t3 + 3 * t2) * prof.phi[i + 1] + (t3 - t2) * h * prof.dphi[i + 1];
  const double lo = std::min(prof.phi[i], prof.phi[i + 1]);
  const double hi = std::max(prof.phi[i], prof.phi[i + 1]);
  return std::clamp(v, lo, hi);
}

double evaluate_derivative(const RadialProfile& prof, double r) {
  if (r > prof.r_max()) return prof.tail.derivative(r);
  if (r <= prof.r.front()) return prof.dphi.front();
  const std::size_t i = interval(prof, r);
  const double h = prof.r[i + 1] - prof.r[i];
  const double t = (r - prof.r[i]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * prof.phi[i] + (6 * t - 6 * t2) * prof.phi[i + 1]) / h +
         (3 * t2 - 4 * t + 1) * prof.dphi[i] + (3 * t2 - 2 * t) * prof.dphi[i + 1];
}

RadialProfile scale_amplitude(const RadialProfile& profile, double lambda) {
  RadialProfile out = profile;
  for (auto& v : out.phi) v *= lambda;
  for (auto& v : out.dphi) v *= lambda;
  out.tail.coefficient *= lambda;
  return out;
}

RadialProfile scale_l2(const RadialProfile& profile, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidParams, "scaling factor must be positive");
  RadialProfile out = profile;
  const double amp = std::pow(lambda, profile.params.dim / 2.0);
  for (auto& v : out.r) v /= lambda;
  for (auto& v : out.phi) v *= amp;
  for (auto& v : out.dphi) v *= amp * lambda;
  out.tail.coefficient *= amp;
  out.tail.r_scale *= lambda;
  return out;
}

RadialProfile make_profile(const ModelParams& params, std::vector<double> r, std::vector<double> phi,
                           std::vector<double> dphi, TailModel tail) {
  if (r.size() < 3 || phi.size() != r.size() || dphi.size() != r.size()) {
    throw Error(ErrorKind::InvalidParams, "profile arrays must have equal length >= 3");
  }
  if (r.front() != 0.0) throw Error(ErrorKind::InvalidParams, "profile grid must start at r = 0");
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (!(r[i] > r[i - 1])) throw Error(ErrorKind::InvalidParams, "profile grid must be strictly increasing");
  }
  RadialProfile prof;
  prof.params = params;
  prof.r = std::move(r);
  prof.phi = std::move(phi);
  prof.dphi = std::move(dphi);
  tail.dim = params.dim;
  prof.tail = tail;
  prof.info.amplitude = prof.phi.front();
  return prof;
}

std::vector<double> ode_residual(const RadialProfile& prof) {
  const auto rhs = make_rhs(prof.params);
  std::vector<double> res(prof.size(), 0.0);
  for (std::size_t i = 2; i + 1 < prof.size(); ++i) {
    const double h1 = prof.r[i] - prof.r[i - 1], h2 = prof.r[i + 1] - prof.r[i];
    // Second-order derivative of φ' on a nonuniform stencil.
    const double d2 = (-h2 / (h1 * (h1 + h2))) * prof.dphi[i - 1] + ((h2 - h1) / (h1 * h2)) * prof.dphi[i] +
                      (h1 / (h2 * (h1 + h2))) * prof.dphi[i + 1];
    res[i] = -d2 - (prof.params.dim - 1) / prof.r[i] * prof.dphi[i] +
             static_cast<double>(rhs.source(prof.phi[i]));
  }
  return res;
}

}  // namespace dpnls
