#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dpnls/functionals.hpp"

namespace dpnls {

/// S_ω(v^λ) for v^λ = λ^{N/2}v(λx), straight from the four norms.
double action_at_l2_scaling(const Norms& norms, const ModelParams& params, double lambda);

/// ∂²_λ S_ω(v^λ) at λ = 1: ‖∇v‖² + α(α−1)/(p+1)·Lp1 − β(β−1)/(q+1)·Lq1.
/// The ω-term is constant in λ and drops out.
double second_derivative_closed_form(const Norms& norms, const ModelParams& params);

/// ω = 0 form with K = P = 0 used to eliminate Lp1 and Lq1; depends on the
/// profile only through ‖∇v‖².
double second_derivative_pohozaev(double grad_sq, const ModelParams& params);

struct ScalingCurve {
  std::vector<double> lambda;
  std::vector<double> S_values;
  double first_deriv_at_1 = 0.0;
  double second_deriv_at_1 = 0.0;
  /// Pohozaev-eliminated form at ω = 0, the general form otherwise.
  double closed_form_second_deriv = 0.0;
  double general_second_deriv = 0.0;
  double P = 0.0;
};

ScalingCurve scaling_curve(const Norms& norms, const ModelParams& params, const std::vector<double>& lambda_grid);
ScalingCurve scaling_curve(const RadialProfile& profile, const ModelParams& params,
                           const std::vector<double>& lambda_grid);

enum class CriterionVerdict { Met, NotMet, Indeterminate };

std::string to_string(CriterionVerdict v);

struct CriterionResult {
  CriterionVerdict verdict = CriterionVerdict::Indeterminate;
  double closed_form = 0.0;
  double finite_difference = 0.0;
  double relative_disagreement = 0.0;
  /// Half-width of the undecidable band, 1e−6·‖∇φ‖².
  double resolution = 0.0;
};

/// Sufficient condition for orbital instability: ∂²_λ S_ω(φ^λ)|_{λ=1} < 0.
/// NotMet means only that the criterion does not apply, never stability.
CriterionResult instability_criterion(const Norms& norms, const ModelParams& params);
CriterionResult instability_criterion(const RadialProfile& profile, const ModelParams& params);

struct SweepRow {
  double p = 0.0;
  double q = 0.0;
  double gamma = 0.0;
  double closed_form = 0.0;
  double finite_difference = 0.0;
  double fd_relative_error = 0.0;
  int sign_closed_form = 0;
  int sign_gamma_test = 0;  // sign(γ_N(p) − q): −1 where q lies above the curve
  bool agreement = false;
  bool near_degenerate = false;
  std::string status = "ok";
};

/// Zero-frequency sign test over (p, q) pairs; near-degenerate rows have |q − γ_N(p)| < band.
std::vector<SweepRow> sign_equivalence_sweep(int dim, const std::vector<std::pair<double, double>>& pq_grid,
                                             const ShootingConfig& cfg = {}, int threads = 1,
                                             double band = 0.02);

struct BOmegaVerdict {
  bool s_lt_mu = false;
  bool p_negative = false;
  bool member = false;
  double margin_S = 0.0;  // μ(ω) − S_ω(v)
  double margin_P = 0.0;  // −P(v)
};

BOmegaVerdict b_omega_verdict(const FunctionalReport& data, double mu_omega);

}  // namespace dpnls
