#pragma once

#include <string>
#include <vector>

#include "dpnls/functionals.hpp"

namespace dpnls {

struct DecayFit {
  bool exponential = false;
  /// ρ̂ in φ ≈ c r^{−ρ̂}(log r)^{−ℓ} (algebraic branch).
  double fitted_exponent = 0.0;
  double fitted_log_power = 0.0;
  double coefficient = 0.0;
  /// κ̂ in φ ≈ A r^{−(N−1)/2} e^{−κ̂ r} (exponential branch).
  double fitted_rate = 0.0;
  double r_a = 0.0;
  double r_b = 0.0;
  double residual_rms = 0.0;
  /// expected_decay for ω = 0; for ω > 0 exponent holds √ω.
  TailLaw theory;
  /// ((N−2)/√2)^{N−2}, the constant of the log-corrected law at p = p*.
  double kappa = 0.0;
};

/// Far-field fit on grid data only (the attached tail is never used).
DecayFit fit_tail(const RadialProfile& profile);

struct UniformBound {
  double C_hat = 0.0;
  std::vector<double> omega;
  std::vector<double> window_sup;
  double r_a = 0.0;
  double r_b = 0.0;
  double rho = 0.0;
};

struct UniformBoundOptions {
  double r_a = 10.0;
  double r_b = 100.0;
  int samples = 400;
};

/// sup_ω sup_{r∈[r_a,r_b]} φ_ω(r) r^ρ over ω ∈ [0, 1].
UniformBound uniform_bound_check(const ModelParams& params_template, const std::vector<double>& omega_grid,
                                 const ShootingConfig& cfg = {}, const UniformBoundOptions& opts = {},
                                 int threads = 1);

struct DifferenceNorms {
  double h1dot = 0.0;  // ‖∇(u−v)‖_{L²}
  double lp1 = 0.0;    // ‖u−v‖_{L^{p+1}}
  double l2 = 0.0;     // ‖u−v‖_{L²}
};

/// Norms of u − v on the union of both grids, with each side interpolated where
/// it has no node, plus the far field beyond both grids.
DifferenceNorms difference_norms(const RadialProfile& u, const RadialProfile& v, double p);

struct LimitStudy {
  std::vector<double> omega;
  std::vector<double> delta_H1dot;
  std::vector<double> delta_Lp1;
  /// NaN unless φ_0 ∈ L².
  std::vector<double> delta_L2;
  std::vector<double> d_gap;
  std::vector<double> mass_times_omega;
  /// |K₀(φ_ω) + ω‖φ_ω‖²| / ‖∇φ_ω‖².
  std::vector<double> identity_residual;
  std::vector<std::string> status;
  double d0 = 0.0;
  bool delta_monotone = false;
  bool mass_monotone = false;
  bool d_gap_monotone = false;
};

/// Sequence must decrease strictly with entries ≥ 1e−4. φ_0 is computed once.
LimitStudy zero_mass_limit_study(const ModelParams& params_template, const std::vector<double>& omega_sequence,
                                 const ShootingConfig& cfg = {}, int threads = 1);

/// Nonincreasing up to a relative slack `tol` on each step.
bool nonincreasing(const std::vector<double>& v, double tol = 0.0);

}  // namespace dpnls
