#pragma once

#include <optional>
#include <utility>
#include <string>
#include <vector>

#include "dpnls/model.hpp"

namespace dpnls {

enum class TailKind { None, Exponential, Algebraic };

std::string to_string(TailKind kind);

/// Analytic far field attached beyond the last grid point.
///
///   Exponential: A · (s r)^{-(N-1)/2} · exp(-κ s r)
///   Algebraic:   c · (s r)^{-ρ̂} · (log s r)^{-ℓ}
///
/// where s is `r_scale` (1 for solver output, λ after an L²-invariant rescaling).
struct TailModel {
  TailKind kind = TailKind::None;
  int dim = 1;
  double coefficient = 0.0;
  double rate = 0.0;
  double exponent = 0.0;
  double log_power = 0.0;
  double r_scale = 1.0;

  double value(double r) const;
  double derivative(double r) const;
};

struct ShootingConfig {
  double amp_lo = 0.5;
  double amp_hi = 2.0;
  double ode_atol = 1e-12;
  double ode_rtol = 1e-10;
  /// Integration cap; algebraic (ω = 0) profiles usually stop here.
  double r_max = 1e4;
  /// Relative width at which the amplitude bisection stops.
  double bisection_tol = 1e-18;
  double origin_offset = 1e-6;
  /// Mesh spacing near the origin; spacing grows like h0·r/stretch_radius beyond stretch_radius.
  double mesh_h0 = 2e-3;
  double stretch_radius = 2.0;
  /// Largest relative disagreement between the bracketing trajectories kept on the grid.
  double agreement_tol = 1e-7;
  /// For ω > 0 the grid stops once φ drops below this fraction of φ(0).
  double decay_floor = 1e-13;
  int max_expansions = 60;
  int max_mesh_refinements = 4;

  void validate() const;
};

/// Diagnostics recorded by the shooting solver.
struct SolveInfo {
  long double amplitude = 0.0L;
  double bracket_width = 0.0;
  int bisection_steps = 0;
  int mesh_refinements = 0;
  double mesh_h0 = 0.0;
  /// max over steps of |local error estimate| / (atol + rtol|y|).
  double max_error_ratio = 0.0;
  double tail_window_lo = 0.0;
  double tail_window_hi = 0.0;
  bool tail_stabilized = false;
};

/// Radial profile φ(r) on a strictly increasing grid starting at r = 0.
struct RadialProfile {
  ModelParams params;
  std::vector<double> r;
  std::vector<double> phi;
  std::vector<double> dphi;
  TailModel tail;
  SolveInfo info;

  double r_max() const { return r.back(); }
  double amplitude() const { return phi.front(); }
  std::size_t size() const { return r.size(); }
};

enum class Trajectory { Overshoot, Undershoot, Converged };

std::string to_string(Trajectory t);

/// Integrates the radial ODE from amplitude φ(0) and reports which side of the ground
/// state the trajectory falls on.
Trajectory classify_trajectory(double amplitude, const ModelParams& params, const ShootingConfig& cfg);

/// Positive, radial, decreasing solution of −φ'' − (N−1)/r φ' + ωφ + φ^p − φ^q = 0.
RadialProfile solve_ground_state(const ModelParams& params, const ShootingConfig& cfg = {});

/// φ(r) for any r ≥ 0: Hermite interpolation on the grid, tail model beyond.
double evaluate(const RadialProfile& profile, double r);
double evaluate_derivative(const RadialProfile& profile, double r);

/// λ·φ.
RadialProfile scale_amplitude(const RadialProfile& profile, double lambda);
/// φ^λ(r) = λ^{N/2} φ(λ r).
RadialProfile scale_l2(const RadialProfile& profile, double lambda);

/// Wraps sampled data (e.g. a closed-form test profile) as a RadialProfile.
RadialProfile make_profile(const ModelParams& params, std::vector<double> r, std::vector<double> phi,
                           std::vector<double> dphi, TailModel tail = {});

struct DecayWindow {
  double r_lo = 0.0;
  double r_hi = 0.0;
  /// Spread of the local exponent −rφ'/φ over the window, relative to its mean.
  double spread = 0.0;
  bool stabilized = false;
};

/// Least-squares fit of log φ against log r on [r_lo, r_hi]: returns (ρ̂, ℓ) for
/// φ ≈ c r^{-ρ̂}(log r)^{-ℓ}. The log log r regressor is used only when
/// `log_power_hint` > 0, with ℓ clamped to hint ± 50%. nullopt if < 4 nodes.
std::optional<std::pair<double, double>> fit_power_law(const RadialProfile& profile, double r_lo, double r_hi,
                                                       double log_power_hint = 0.0);

/// Farthest decade [r, 10r] of grid data on which −rφ'/φ varies by at most
/// `rel_spread`. Falls back to the last decade (stabilized = false) if none does.
DecayWindow find_decay_window(const RadialProfile& profile, double rel_spread = 0.01);

/// Pointwise residual of the radial equation at interior grid nodes, using a
/// second-order difference of φ'. Used for post-solve checks.
std::vector<double> ode_residual(const RadialProfile& profile);

}  // namespace dpnls
