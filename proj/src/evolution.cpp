#include "dpnls/evolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>

#include "dpnls/error.hpp"

namespace dpnls {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place complex FFT on an owned, FFTW-aligned buffer. Plans use FFTW_ESTIMATE,
/// so they do not depend on timing and results are reproducible run to run.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n) {
    data_ = reinterpret_cast<cplx*>(fftw_alloc_complex(n));
    auto* raw = reinterpret_cast<fftw_complex*>(data_);
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(data_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  cplx* data() { return data_; }
  const cplx* data() const { return data_; }
  std::size_t size() const { return n_; }
  void forward() { fftw_execute(fwd_); }
  /// Unnormalized; callers fold 1/n into their multipliers.
  void backward() { fftw_execute(bwd_); }

 private:
  std::size_t n_;
  cplx* data_;
  fftw_plan fwd_, bwd_;
};

std::vector<double> wavenumbers(double L, std::size_t M) {
  std::vector<double> k(M);
  const double base = M_PI / L;
  for (std::size_t j = 0; j < M; ++j) {
    const long m = j < M / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(M);
    k[j] = base * static_cast<double>(m);
  }
  return k;
}

bool all_finite(const cplx* u, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(u[j].real()) || !std::isfinite(u[j].imag())) return false;
  }
  return true;
}

// |u|^e from |u|², without exp/log when e or e/2 is a small integer.
class AbsPower {
 public:
  explicit AbsPower(double e) : e_(e) {
    const double half = e / 2.0;
    if (half == std::round(half) && half >= 0.0 && half <= 16.0) {
      mode_ = Mode::Even;
      n_ = static_cast<int>(half);
    } else if (e == std::round(e) && e > 0.0 && e <= 33.0) {
      mode_ = Mode::Odd;
      n_ = static_cast<int>((e - 1.0) / 2.0);
    }
  }

  double operator()(double a2) const {
    switch (mode_) {
      case Mode::Even: return ipow(a2, n_);
      case Mode::Odd: return std::sqrt(a2) * ipow(a2, n_);
      case Mode::General: break;
    }
    return a2 > 0.0 ? std::exp(0.5 * e_ * std::log(a2)) : 0.0;
  }

 private:
  enum class Mode { Even, Odd, General };
  static double ipow(double x, int n) {
    double r = 1.0;
    for (; n > 0; n >>= 1, x *= x) {
      if (n & 1) r *= x;
    }
    return r;
  }
  double e_;
  Mode mode_ = Mode::General;
  int n_ = 0;
};

// Pointwise sums that do not need derivatives.
void local_sums(const WaveField& f, const ModelParams& params, FieldQuantities& q) {
  const AbsPower pow_p(params.p + 1.0), pow_q(params.q + 1.0);
  const double dx = f.dx();
  double mass = 0, lp = 0, lq = 0, var = 0, edge = 0;
  for (std::size_t j = 0; j < f.M; ++j) {
    const double a2 = std::norm(f.u[j]);
    const double x = f.x(j);
    mass += a2;
    var += x * x * a2;
    if (std::abs(x) > 0.9 * f.L) edge += a2;
    lp += pow_p(a2);
    lq += pow_q(a2);
  }
  q.mass = mass * dx;
  q.lp1 = lp * dx;
  q.lq1 = lq * dx;
  q.variance = var * dx;
  q.boundary_mass = mass > 0.0 ? edge / mass : 0.0;
}

void assemble(const ModelParams& params, FieldQuantities& q) {
  const double alpha = (params.p - 1.0) / 2.0, beta = (params.q - 1.0) / 2.0;
  q.energy = 0.5 * q.grad_sq + q.lp1 / (params.p + 1.0) - q.lq1 / (params.q + 1.0);
  q.virial = q.grad_sq + alpha * q.lp1 / (params.p + 1.0) - beta * q.lq1 / (params.q + 1.0);
}

// One substep of the splitting: nonlinear weights a_0..a_k around linear weights b_0..b_{k−1}.
struct Splitting {
  std::vector<double> a, b;
};

Splitting splitting(int order) {
  if (order == 2) return {{0.5, 0.5}, {1.0}};
  // Triple-jump composition of three Strang steps.
  const double c = std::cbrt(2.0);
  const double w1 = 1.0 / (2.0 - c), w0 = -c / (2.0 - c);
  return {{w1 / 2, (w1 + w0) / 2, (w0 + w1) / 2, w1 / 2}, {w1, w0, w1}};
}

class Propagator {
 public:
  Propagator(const WaveField& f, const ModelParams& params, bool nonlinear, int order)
      : field_(f),
        nonlinear_(nonlinear),
        params_(params),
        pow_p_(params.p - 1.0),
        pow_q_(params.q - 1.0),
        split_(splitting(order)),
        fft_(f.M),
        k_(wavenumbers(f.L, f.M)) {}

  WaveField& field() { return field_; }

  /// n substeps of size tau; nonlinear stages that meet across substeps are merged.
  void advance(double tau, long n) {
    cplx* u = fft_.data();
    std::copy(field_.u.begin(), field_.u.end(), u);
    const std::size_t k = split_.b.size();
    double pending = split_.a[0] * tau;
    for (long s = 0; s < n; ++s) {
      for (std::size_t i = 0; i < k; ++i) {
        rotate(u, pending);
        fft_.forward();
        const auto& lin = linear_factor(split_.b[i] * tau);
        for (std::size_t j = 0; j < field_.M; ++j) u[j] *= lin[j];
        fft_.backward();
        pending = split_.a[i + 1] * tau;
      }
      if (s + 1 < n) pending += split_.a[0] * tau;
    }
    rotate(u, pending);
    std::copy(u, u + field_.M, field_.u.begin());
  }

  FieldQuantities measure() {
    FieldQuantities q;
    local_sums(field_, params_, q);
    spectral_sums(q);
    assemble(params_, q);
    return q;
  }

  void spectral_sums(FieldQuantities& q) {
    cplx* u = fft_.data();
    std::copy(field_.u.begin(), field_.u.end(), u);
    fft_.forward();
    const std::size_t M = field_.M;
    double s = 0, peak = 0, outer = 0;
    for (std::size_t j = 0; j < M; ++j) {
      const double a2 = std::norm(u[j]);
      s += k_[j] * k_[j] * a2;
      peak = std::max(peak, a2);
      if (j > M / 4 && j < M - M / 4) outer = std::max(outer, a2);
    }
    q.grad_sq = s * field_.dx() / static_cast<double>(M);
    q.spectral_tail = peak > 0.0 ? std::sqrt(outer / peak) : 0.0;
  }

  bool finite() const { return all_finite(field_.u.data(), field_.M); }

 private:
  // Exact flow of i u_t = (|u|^{p−1} − |u|^{q−1}) u, which keeps |u| fixed.
  void rotate(cplx* u, double tau) {
    if (!nonlinear_ || tau == 0.0) return;
    for (std::size_t j = 0; j < field_.M; ++j) {
      const double a2 = std::norm(u[j]);
      if (a2 == 0.0) continue;
      u[j] *= std::polar(1.0, -tau * (pow_p_(a2) - pow_q_(a2)));
    }
  }

  // e^{−ik²h}/M; the splittings here use at most two distinct h per substep size.
  const std::vector<cplx>& linear_factor(double h) {
    for (auto& [key, v] : linear_cache_) {
      if (key == h) return v;
    }
    if (linear_cache_.size() >= 4) linear_cache_.clear();
    std::vector<cplx> v(field_.M);
    const double inv = 1.0 / static_cast<double>(field_.M);
    for (std::size_t j = 0; j < field_.M; ++j) v[j] = std::polar(inv, -k_[j] * k_[j] * h);
    linear_cache_.emplace_back(h, std::move(v));
    return linear_cache_.back().second;
  }

  WaveField field_;
  bool nonlinear_;
  ModelParams params_;
  AbsPower pow_p_, pow_q_;
  Splitting split_;
  Fft fft_;
  std::vector<double> k_;
  std::vector<std::pair<double, std::vector<cplx>>> linear_cache_;
};

// Reference spectrum weighted by (1 + k²), reused for every distance evaluation.
class DistanceProbe {
 public:
  explicit DistanceProbe(const WaveField& reference)
      : M_(reference.M), dx_(reference.dx()), fft_(reference.M), k_(wavenumbers(reference.L, reference.M)) {
    cplx* a = fft_.data();
    std::copy(reference.u.begin(), reference.u.end(), a);
    fft_.forward();
    ref_hat_.assign(a, a + M_);
    ref_norm_sq_ = 0;
    for (std::size_t j = 0; j < M_; ++j) ref_norm_sq_ += (1.0 + k_[j] * k_[j]) * std::norm(ref_hat_[j]);
    ref_norm_sq_ *= dx_ / static_cast<double>(M_);
  }

  double reference_norm() const { return std::sqrt(ref_norm_sq_); }

  OrbitalDistance operator()(const WaveField& f) {
    if (f.M != M_) throw Error(ErrorKind::InvalidParams, "orbital_distance: grids differ");
    cplx* a = fft_.data();
    std::copy(f.u.begin(), f.u.end(), a);
    fft_.forward();
    u_hat_.assign(a, a + M_);
    for (std::size_t j = 0; j < M_; ++j) {
      const double w = 1.0 + k_[j] * k_[j];
      // c(y_m) = Σ_k w_k û_k conj(φ̂_k) e^{ik y_m}: every grid shift from one inverse FFT.
      a[j] = w * a[j] * std::conj(ref_hat_[j]);
    }
    const double scale = dx_ / static_cast<double>(M_);
    fft_.backward();
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t m = 0; m < M_; ++m) {
      const double v = std::abs(a[m]);
      if (v > best_abs) {
        best_abs = v;
        best = m;
      }
    }
    // The distance itself is summed directly at the best (y, θ): expanding the
    // square would lose half the digits to cancellation near zero.
    OrbitalDistance d;
    d.phase = std::arg(a[best]);
    const cplx rot = std::polar(1.0, d.phase);
    double dist_sq = 0;
    for (std::size_t j = 0; j < M_; ++j) {
      // e^{−ik y} with k y = 2π·best·j/M exactly.
      const double turn = static_cast<double>((best * j) % M_) / static_cast<double>(M_);
      const cplx shifted = rot * ref_hat_[j] * std::polar(1.0, -2.0 * M_PI * turn);
      dist_sq += (1.0 + k_[j] * k_[j]) * std::norm(u_hat_[j] - shifted);
    }
    d.distance = std::sqrt(dist_sq * scale);
    // Shifts past half the box wrap to negative y.
    const long m = best < M_ / 2 ? static_cast<long>(best) : static_cast<long>(best) - static_cast<long>(M_);
    d.shift = static_cast<double>(m) * dx_;
    d.shift_resolution = dx_;
    return d;
  }

 private:
  std::size_t M_;
  double dx_;
  Fft fft_;
  std::vector<double> k_;
  std::vector<cplx> ref_hat_, u_hat_;
  double ref_norm_sq_ = 0.0;
};

double decay_radius(const RadialProfile& profile, double rel) {
  const double target = rel * profile.amplitude();
  double r = 1e-3;
  while (r < 1e12) {
    if (evaluate(profile, r) < target) return r;
    r *= 1.01;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

void WaveField::validate() const {
  if (!(L > 0.0)) throw Error(ErrorKind::InvalidParams, "field: L must be positive");
  if (M < 8 || (M & (M - 1)) != 0) throw Error(ErrorKind::InvalidParams, "field: M must be a power of two >= 8");
  if (u.size() != M) throw Error(ErrorKind::InvalidParams, "field: value count differs from M");
}

WaveField make_field(double L, std::size_t M) {
  WaveField f;
  f.L = L;
  f.M = M;
  f.u.assign(M, cplx{});
  f.validate();
  return f;
}

WaveField refine(const WaveField& field, std::size_t new_M) {
  field.validate();
  WaveField out = make_field(field.L, new_M);
  out.t = field.t;
  if (new_M < field.M) throw Error(ErrorKind::InvalidParams, "refine: grid can only grow");
  const std::size_t M = field.M;
  Fft small(M), large(new_M);
  std::copy(field.u.begin(), field.u.end(), small.data());
  small.forward();
  cplx* big = large.data();
  std::fill(big, big + new_M, cplx{});
  // Both grids start at x = −L, so the modes carry the same phase on each.
  const double inv = 1.0 / static_cast<double>(M);
  for (std::size_t j = 0; j < M; ++j) {
    const std::size_t dst = j < M / 2 ? j : new_M - (M - j);
    big[dst] = small.data()[j] * inv;
  }
  large.backward();
  std::copy(big, big + new_M, out.u.begin());
  return out;
}

double cutoff(double s) {
  s = std::abs(s);
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  auto bump = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  const double a = bump(2.0 - s), b = bump(s - 1.0);
  return a / (a + b);
}

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::AmplitudeScaled: return "amplitude";
    case InitialKind::L2Scaled: return "l2";
    case InitialKind::CutoffAmplitudeScaled: return "cutoff_amplitude";
    case InitialKind::CutoffL2Scaled: return "cutoff_l2";
  }
  return "amplitude";
}

InitialKind initial_kind_from_string(const std::string& s) {
  for (auto k : {InitialKind::AmplitudeScaled, InitialKind::L2Scaled, InitialKind::CutoffAmplitudeScaled,
                 InitialKind::CutoffL2Scaled}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::InvalidParams, "unknown initial-data kind '" + s + "'");
}

WaveField make_initial_data(InitialKind kind, const RadialProfile& profile, double lambda, double R, double L,
                            std::size_t M) {
  if (profile.params.dim != 1) throw Error(ErrorKind::InvalidParams, "time evolution is one-dimensional only");
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidParams, "initial data: lambda must be positive");
  WaveField f = make_field(L, M);
  const bool cut = kind == InitialKind::CutoffAmplitudeScaled || kind == InitialKind::CutoffL2Scaled;
  const bool l2 = kind == InitialKind::L2Scaled || kind == InitialKind::CutoffL2Scaled;
  if (cut) {
    if (!(R > 0.0)) throw Error(ErrorKind::InvalidParams, "initial data: cutoff radius must be positive");
    if (2.0 * R > 0.8 * L) throw Error(ErrorKind::GridTooSmall, "initial data: cutoff support 2R exceeds 0.8L");
  } else {
    const double support = decay_radius(profile, 1e-8) / (l2 ? lambda : 1.0);
    if (support > 0.8 * L) {
      throw Error(ErrorKind::GridTooSmall, "initial data: profile does not decay to 1e-8 within 0.8L");
    }
  }
  const double amp = l2 ? std::sqrt(lambda) : lambda;
  const double stretch = l2 ? lambda : 1.0;
  for (std::size_t j = 0; j < M; ++j) {
    const double x = f.x(j);
    double v = amp * evaluate(profile, std::abs(x) * stretch);
    if (cut) v *= cutoff(std::abs(x) / R);
    f.u[j] = v;
  }
  return f;
}

FieldQuantities measure(const WaveField& field, const ModelParams& params) {
  field.validate();
  Propagator prop(field, params, true, 2);
  return prop.measure();
}

Norms field_norms(const FieldQuantities& q) {
  Norms n;
  n.L2_sq = q.mass;
  n.gradL2_sq = q.grad_sq;
  n.Lp1 = q.lp1;
  n.Lq1 = q.lq1;
  return n;
}

OrbitalDistance orbital_distance(const WaveField& field, const WaveField& reference) {
  field.validate();
  reference.validate();
  DistanceProbe probe(reference);
  return probe(field);
}

OrbitalDistance orbital_distance(const WaveField& field, const RadialProfile& profile) {
  return orbital_distance(field, make_initial_data(InitialKind::AmplitudeScaled, profile, 1.0, 0.0, field.L, field.M));
}

EvolveResult evolve(const WaveField& field, const ModelParams& params, const EvolutionConfig& cfg,
                    const WaveField* reference) {
  field.validate();
  params.validate();
  if (params.dim != 1) throw Error(ErrorKind::InvalidParams, "time evolution is one-dimensional only");
  if (!(cfg.dt > 0.0) || !(cfg.t_end >= 0.0) || cfg.diagnostics_every < 1) {
    throw Error(ErrorKind::InvalidParams, "evolve: need dt > 0, t_end >= 0, diagnostics_every >= 1");
  }
  if (cfg.splitting_order != 2 && cfg.splitting_order != 4) {
    throw Error(ErrorKind::InvalidParams, "evolve: splitting order must be 2 or 4");
  }
  if (reference && (reference->M != field.M || reference->L != field.L)) {
    throw Error(ErrorKind::InvalidParams, "evolve: reference lives on a different grid");
  }
  auto prop = std::make_unique<Propagator>(field, params, cfg.nonlinear, cfg.splitting_order);
  std::optional<WaveField> ref;
  std::optional<DistanceProbe> probe;
  if (reference) {
    ref = *reference;
    probe.emplace(*ref);
  }

  auto quantities = [&] {
    FieldQuantities q = prop->measure();
    if (!cfg.nonlinear) {
      q.lp1 = q.lq1 = 0.0;
      q.energy = 0.5 * q.grad_sq;
      q.virial = q.grad_sq;
    }
    return q;
  };
  auto can_refine = [&](const FieldQuantities& q) {
    return cfg.max_grid_size > prop->field().M && q.spectral_tail > cfg.spectral_tail_tol;
  };
  auto grow = [&] {
    WaveField bigger = refine(prop->field(), 2 * prop->field().M);
    prop = std::make_unique<Propagator>(bigger, params, cfg.nonlinear, cfg.splitting_order);
    if (ref) {
      ref = refine(*ref, bigger.M);
      probe.reset();
      probe.emplace(*ref);
    }
  };

  EvolutionDiagnostics diag;
  auto record = [&](const FieldQuantities& q) {
    diag.t.push_back(prop->field().t);
    diag.E.push_back(q.energy);
    diag.M.push_back(q.mass);
    diag.P.push_back(q.virial);
    diag.V.push_back(q.variance);
    diag.grad_norm.push_back(std::sqrt(q.grad_sq));
    diag.distance.push_back(probe ? (*probe)(prop->field()).distance : std::nan(""));
    diag.max_boundary_mass = std::max(diag.max_boundary_mass, q.boundary_mass);
  };

  std::vector<double> snap_times = cfg.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;
  std::vector<WaveField> snapshots;
  auto take_snapshots = [&] {
    while (next_snap < snap_times.size() && snap_times[next_snap] <= prop->field().t + 1e-12 * cfg.dt) {
      snapshots.push_back(prop->field());
      ++next_snap;
    }
  };

  FieldQuantities q = quantities();
  while (can_refine(q)) {
    grow();
    q = quantities();
  }
  const double grad0 = std::sqrt(q.grad_sq);
  record(q);
  take_snapshots();
  diag.min_substep = cfg.dt;
  const long steps = std::lround(cfg.t_end / cfg.dt);
  const double t0 = field.t;
  // Progress through a base step is num / 2^level of dt, so substeps always land on it exactly.
  int level = 0;
  std::vector<cplx> saved;
  diag.stop_reason = "t_end reached";
  bool stop = false;
  for (long b = 1; b <= steps && !stop; ++b) {
    const double t_base = t0 + static_cast<double>(b - 1) * cfg.dt;
    long long num = 0;
    bool last_nonfinite = false;
    while (num < (1LL << level)) {
      const double tau = std::ldexp(cfg.dt, -level);
      if (tau < cfg.dt_floor || level > 60) {
        if (last_nonfinite) throw Error(ErrorKind::NonFinite, "evolve: non-finite field at the step-size floor");
        diag.blowup_flag = true;
        diag.blowup_time = prop->field().t;
        diag.stop_reason = "step-size floor reached";
        stop = true;
        break;
      }
      saved = prop->field().u;
      prop->advance(tau, 1);
      last_nonfinite = !prop->finite();
      if (last_nonfinite && !cfg.adaptive) {
        throw Error(ErrorKind::NonFinite, "evolve: field became non-finite without crossing the blowup threshold");
      }
      FieldQuantities next;
      if (!last_nonfinite) next = quantities();
      if (!last_nonfinite && can_refine(next)) {
        // Retry the substep on the finer grid before judging the energy jump.
        prop->field().u = saved;
        grow();
        q = quantities();
        continue;
      }
      const double jump = std::abs(next.energy - q.energy);
      const double allowed = cfg.energy_jump_tol * (std::abs(q.energy) + next.grad_sq);
      if (cfg.adaptive && (last_nonfinite || !(jump <= allowed))) {
        prop->field().u = saved;
        ++level;
        num *= 2;
        continue;
      }
      ++num;
      ++diag.substeps;
      diag.min_substep = std::min(diag.min_substep, tau);
      q = next;
      prop->field().t = t_base + static_cast<double>(num) * tau;
      if (std::sqrt(q.grad_sq) >= cfg.blowup_factor * grad0) {
        diag.blowup_flag = true;
        diag.blowup_time = prop->field().t;
        diag.stop_reason = "gradient threshold crossed";
        stop = true;
        break;
      }
      // Coarsen once comfortably inside the tolerance, keeping progress on the coarser lattice.
      if (cfg.adaptive && level > 0 && num % 2 == 0 && jump < allowed / 64.0) {
        --level;
        num /= 2;
      }
    }
    if (stop) break;
    prop->field().t = t0 + static_cast<double>(b) * cfg.dt;
    take_snapshots();
    if (b % cfg.diagnostics_every == 0) {
      record(q);
      if (cfg.stop_distance > 0.0 && diag.distance.back() > cfg.stop_distance) {
        diag.stop_reason = "distance threshold crossed";
        break;
      }
    }
  }
  diag.final_time = prop->field().t;
  diag.final_grad_norm = std::sqrt(q.grad_sq);
  diag.final_grid_size = prop->field().M;
  return {prop->field(), diag, std::move(snapshots)};
}

double virial_consistency(const EvolutionDiagnostics& diag) {
  const std::size_t n = diag.t.size();
  if (n < 5) throw Error(ErrorKind::InsufficientSamples, "virial_consistency: need at least 5 samples");
  const double h = diag.t[1] - diag.t[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(diag.t[i] - diag.t[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h))) {
      throw Error(ErrorKind::InsufficientSamples, "virial_consistency: samples are not uniformly spaced");
    }
  }
  double scale = 0.0;
  for (double p : diag.P) scale = std::max(scale, 8.0 * std::abs(p));
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double vdd = (diag.V[i + 1] - 2.0 * diag.V[i] + diag.V[i - 1]) / (h * h);
    worst = std::max(worst, std::abs(vdd - 8.0 * diag.P[i]));
  }
  return scale > 0.0 ? worst / scale : worst;
}

EscapeReport instability_escape_test(const ModelParams& params, const RadialProfile& profile,
                                     const EscapeConfig& cfg) {
  params.validate();
  if (classify_regime(params).tag != Regime::UnstableSmallOmega) {
    throw Error(ErrorKind::HypothesisViolated, "escape test requires the small-frequency instability regime");
  }
  const WaveField u0 = make_initial_data(InitialKind::CutoffL2Scaled, profile, cfg.lambda, cfg.R, cfg.L, cfg.M);
  const WaveField ref = make_initial_data(InitialKind::CutoffAmplitudeScaled, profile, 1.0, cfg.R, cfg.L, cfg.M);
  DistanceProbe probe(ref);
  EscapeReport rep;
  rep.initial_distance = probe(u0).distance;
  rep.reference_distance = std::max(rep.initial_distance, cfg.distance_floor * probe.reference_norm());
  EvolutionConfig ecfg = cfg.evolution;
  if (cfg.stop_on_escape) ecfg.stop_distance = cfg.escape_factor * rep.reference_distance;
  auto run = evolve(u0, params, ecfg, &ref);
  rep.diag = std::move(run.diag);
  rep.snapshots = std::move(run.snapshots);
  rep.min_neg_P_in_tube = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.diag.t.size(); ++i) {
    const double ratio = rep.diag.distance[i] / rep.reference_distance;
    rep.max_distance_ratio = std::max(rep.max_distance_ratio, ratio);
    if (!rep.escape_time && ratio > cfg.escape_factor) rep.escape_time = rep.diag.t[i];
    if (!rep.escape_time) rep.min_neg_P_in_tube = std::min(rep.min_neg_P_in_tube, -rep.diag.P[i]);
  }
  return rep;
}

}  // namespace dpnls
