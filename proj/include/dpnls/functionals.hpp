#pragma once

#include <string>
#include <vector>

#include "dpnls/groundstate.hpp"
#include "dpnls/model.hpp"

namespace dpnls {

/// Radial norms with weight |S^{N−1}| r^{N−1}. Lp1 and Lq1 are the (p+1)-th and
/// (q+1)-th powers of the corresponding Lebesgue norms.
struct Norms {
  double L2_sq = 0.0;
  double gradL2_sq = 0.0;
  double Lp1 = 0.0;
  double Lq1 = 0.0;
  /// L2_sq is only the integral over the grid: the tail makes it infinite.
  bool l2_divergent = false;
};

struct FunctionalReport {
  Norms norms;
  double S = 0.0;
  double K = 0.0;
  double J = 0.0;
  double P = 0.0;
  double pohozaev_residual_K = 0.0;  // K / gradL2_sq
  double pohozaev_residual_P = 0.0;  // P / gradL2_sq
};

struct QuadratureOptions {
  /// Divergent norms raise DivergentNorm instead of being flagged.
  bool strict = false;
};

Norms compute_norms(const RadialProfile& profile, const QuadratureOptions& opts = {});

/// Action, Nehari, J and virial values assembled from the four norms.
FunctionalReport report_from_norms(const Norms& norms, const ModelParams& params);

FunctionalReport compute_report(const RadialProfile& profile, const ModelParams& params,
                                const QuadratureOptions& opts = {});

/// K at the rescaled profile: λ↦λv for nehari, λ↦λ^{N/2}v(λ·) for the virial scaling.
double nehari_at(const Norms& norms, const ModelParams& params, double lambda);
double nehari_at_l2_scaling(const Norms& norms, const ModelParams& params, double lambda);

/// Positive λ₁ with K(λ₁v) = 0.
double nehari_rescale(const Norms& norms, const ModelParams& params);
double nehari_rescale(const RadialProfile& profile, const ModelParams& params);

/// Positive λ₀ with K(v^{λ₀}) = 0, v^λ = λ^{N/2}v(λx). Mass-critical q requires P(v) ≤ 0.
double virial_scaling_root(const Norms& norms, const ModelParams& params);
double virial_scaling_root(const RadialProfile& profile, const ModelParams& params);

struct DCurve {
  std::vector<double> omega;
  std::vector<double> d_values;
  std::vector<double> mass_values;
  std::vector<bool> mass_divergent;
  /// "ok" or the error kind of a failed solve; failed entries carry NaN values.
  std::vector<std::string> status;
  bool strictly_increasing = false;
  bool positive = false;
};

/// d(ω) = S_ω(φ_ω) along a sorted grid of frequencies. `threads` caps parallel solves.
DCurve d_curve(const std::vector<double>& omega_grid, const ModelParams& params_template,
               const ShootingConfig& cfg = {}, int threads = 1);

struct StraussMargin {
  /// min over r of (‖u‖_{p+1}^{(p+1)/(p+3)}‖∇u‖^{2/(p+3)} − r^{2(N−1)/(p+3)}|u(r)|).
  double margin = 0.0;
  /// Same bound carrying the constant ((p+3)/(2|S^{N−1}|))^{2/(p+3)} that the
  /// integration-by-parts argument actually produces.
  double corrected_margin = 0.0;
  double rhs = 0.0;
  double sup_lhs = 0.0;
  double r_at_sup = 0.0;
};

StraussMargin strauss_bound_check(const RadialProfile& profile, const ModelParams& params);

}  // namespace dpnls
