#include "dpnls/stability.hpp"

#include <cmath>
#include <limits>

#include "dpnls/error.hpp"
#include "dpnls/parallel.hpp"

namespace dpnls {

namespace {

constexpr double kFdStep = 1e-2;
constexpr double kResolution = 1e-6;
constexpr double kAgreement = 1e-4;

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double fd_first(const Norms& n, const ModelParams& params, double h) {
  auto S = [&](double l) { return action_at_l2_scaling(n, params, l); };
  return (-S(1 + 2 * h) + 8 * S(1 + h) - 8 * S(1 - h) + S(1 - 2 * h)) / (12 * h);
}

double fd_second(const Norms& n, const ModelParams& params, double h) {
  auto S = [&](double l) { return action_at_l2_scaling(n, params, l); };
  return (-S(1 + 2 * h) + 16 * S(1 + h) - 30 * S(1.0) + 16 * S(1 - h) - S(1 - 2 * h)) / (12 * h * h);
}

}  // namespace

double action_at_l2_scaling(const Norms& n, const ModelParams& params, double lambda) {
  const double mass_term = params.omega > 0.0 ? params.omega * n.L2_sq : 0.0;
  return 0.5 * lambda * lambda * n.gradL2_sq + 0.5 * mass_term +
         std::pow(lambda, params.alpha()) * n.Lp1 / (params.p + 1.0) -
         std::pow(lambda, params.beta()) * n.Lq1 / (params.q + 1.0);
}

double second_derivative_closed_form(const Norms& n, const ModelParams& params) {
  const double a = params.alpha(), b = params.beta();
  return n.gradL2_sq + a * (a - 1.0) / (params.p + 1.0) * n.Lp1 - b * (b - 1.0) / (params.q + 1.0) * n.Lq1;
}

double second_derivative_pohozaev(double grad_sq, const ModelParams& params) {
  const double a = params.alpha(), b = params.beta();
  const double ap = a / (params.p + 1.0), bq = b / (params.q + 1.0);
  const double inv = 1.0 / (bq - ap);
  return grad_sq * (1.0 + a * (a - 1.0) / (params.p + 1.0) * inv * (1.0 - bq) -
                    b * (b - 1.0) / (params.q + 1.0) * inv * (1.0 - ap));
}

ScalingCurve scaling_curve(const Norms& n, const ModelParams& params, const std::vector<double>& lambda_grid) {
  ScalingCurve c;
  c.lambda = lambda_grid;
  c.S_values.reserve(lambda_grid.size());
  for (double l : lambda_grid) {
    if (!(l > 0.0)) throw Error(ErrorKind::InvalidParams, "scaling_curve: lambda must be positive");
    c.S_values.push_back(action_at_l2_scaling(n, params, l));
  }
  c.first_deriv_at_1 = fd_first(n, params, 1e-3);
  c.second_deriv_at_1 = fd_second(n, params, kFdStep);
  c.general_second_deriv = second_derivative_closed_form(n, params);
  c.closed_form_second_deriv =
      params.omega == 0.0 ? second_derivative_pohozaev(n.gradL2_sq, params) : c.general_second_deriv;
  c.P = report_from_norms(n, params).P;
  return c;
}

ScalingCurve scaling_curve(const RadialProfile& profile, const ModelParams& params,
                           const std::vector<double>& lambda_grid) {
  return scaling_curve(compute_report(profile, params).norms, params, lambda_grid);
}

std::string to_string(CriterionVerdict v) {
  switch (v) {
    case CriterionVerdict::Met: return "met";
    case CriterionVerdict::NotMet: return "not_met";
    case CriterionVerdict::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

CriterionResult instability_criterion(const Norms& n, const ModelParams& params) {
  CriterionResult r;
  r.closed_form = second_derivative_closed_form(n, params);
  r.finite_difference = fd_second(n, params, kFdStep);
  r.resolution = kResolution * n.gradL2_sq;
  r.relative_disagreement =
      std::abs(r.closed_form - r.finite_difference) / std::max(std::abs(r.closed_form), r.resolution);
  if (std::abs(r.closed_form) <= r.resolution || r.relative_disagreement > kAgreement) {
    r.verdict = CriterionVerdict::Indeterminate;
  } else {
    r.verdict = r.closed_form < 0.0 ? CriterionVerdict::Met : CriterionVerdict::NotMet;
  }
  return r;
}

CriterionResult instability_criterion(const RadialProfile& profile, const ModelParams& params) {
  return instability_criterion(compute_report(profile, params).norms, params);
}

std::vector<SweepRow> sign_equivalence_sweep(int dim, const std::vector<std::pair<double, double>>& pq_grid,
                                             const ShootingConfig& cfg, int threads, double band) {
  std::vector<SweepRow> rows(pq_grid.size());
  parallel_for(pq_grid.size(), threads, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.p = pq_grid[i].first;
    row.q = pq_grid[i].second;
    row.closed_form = row.finite_difference = row.fd_relative_error = std::numeric_limits<double>::quiet_NaN();
    try {
      row.gamma = gamma_curve(dim, row.p);
      row.near_degenerate = std::abs(row.q - row.gamma) < band;
      row.sign_gamma_test = sign_of(row.gamma - row.q);
      const ModelParams params{dim, row.p, row.q, 0.0};
      params.validate();
      if (!(row.q < params.p_c())) throw Error(ErrorKind::InvalidParams, "sweep requires q < 1+4/N");
      const auto prof = solve_ground_state(params, cfg);
      const auto norms = compute_report(prof, params).norms;
      row.closed_form = second_derivative_pohozaev(norms.gradL2_sq, params);
      row.finite_difference = fd_second(norms, params, kFdStep);
      row.fd_relative_error = std::abs(row.closed_form - row.finite_difference) / std::abs(row.closed_form);
      row.sign_closed_form = sign_of(row.closed_form);
      row.agreement = row.sign_closed_form == row.sign_gamma_test;
    } catch (const Error& e) {
      row.status = std::string(to_string(e.kind()));
      row.agreement = false;
    }
  });
  return rows;
}

BOmegaVerdict b_omega_verdict(const FunctionalReport& data, double mu_omega) {
  BOmegaVerdict v;
  v.margin_S = mu_omega - data.S;
  v.margin_P = -data.P;
  v.s_lt_mu = data.S < mu_omega;
  v.p_negative = data.P < 0.0;
  v.member = v.s_lt_mu && v.p_negative;
  return v;
}

}  // namespace dpnls
