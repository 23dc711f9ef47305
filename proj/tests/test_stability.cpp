#include <doctest.h>

#include <cmath>

#include "dpnls/evolution.hpp"
#include "dpnls/stability.hpp"
#include "oracles.hpp"

using namespace dpnls;

namespace {
Norms exact_norms_135() {
  Norms n;
  n.gradL2_sq = oracle::kGrad135;
  n.Lp1 = oracle::kLp1_135;
  n.Lq1 = oracle::kLq1_135;
  return n;
}
}  // namespace

TEST_CASE("closed-form second derivative matches finite differences") {
  const ModelParams m{1, 3.0, 5.0, 0.0};
  const Norms n = exact_norms_135();
  const double h = 1e-3;
  const double fd = (action_at_l2_scaling(n, m, 1 + h) - 2 * action_at_l2_scaling(n, m, 1) +
                     action_at_l2_scaling(n, m, 1 - h)) / (h * h);
  CHECK(second_derivative_closed_form(n, m) == doctest::Approx(fd).epsilon(1e-5));
  CHECK(second_derivative_pohozaev(n.gradL2_sq, m) == doctest::Approx(fd).epsilon(1e-5));
  // q = 5 > γ₁(3) = 2.2: criterion met.
  CHECK(second_derivative_closed_form(n, m) < 0.0);
}

TEST_CASE("criterion sign follows the boundary curve") {
  const ModelParams above{1, 2.0, 4.5, 0.0};  // γ₁(2) = 3.4
  const ModelParams below{1, 2.0, 3.0, 0.0};
  CHECK(instability_criterion(solve_ground_state(above), above).verdict == CriterionVerdict::Met);
  CHECK(instability_criterion(solve_ground_state(below), below).verdict == CriterionVerdict::NotMet);
}

TEST_CASE("small sweep agrees with the curve") {
  const auto rows = sign_equivalence_sweep(1, {{1.5, 3.0}, {2.0, 4.0}, {3.0, 4.5}}, {}, 3);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CAPTURE(r.p);
    CAPTURE(r.q);
    CHECK(r.status == "ok");
    CHECK(r.agreement);
    CHECK(r.fd_relative_error < 1e-4);
  }
}

TEST_CASE("scaling curve is stationary at lambda = 1") {
  const ModelParams m{1, 2.0, 3.0, 1.0};
  const auto c = scaling_curve(solve_ground_state(m), m, {0.9, 1.0, 1.1});
  CHECK(std::abs(c.first_deriv_at_1) < 1e-6);
  CHECK(c.second_deriv_at_1 == doctest::Approx(c.general_second_deriv).epsilon(1e-4));
}

TEST_CASE("amplitude-scaled cutoff data lies in the blowup set") {
  const ModelParams m{1, 2.0, 6.0, 1.0};
  const auto prof = solve_ground_state(m);
  const double mu = compute_report(prof, m).S;
  const WaveField u = make_initial_data(InitialKind::CutoffAmplitudeScaled, prof, 1.1, 40.0, 128.0, 4096);
  const auto rep = report_from_norms(field_norms(measure(u, m)), m);
  const auto v = b_omega_verdict(rep, mu);
  CHECK(v.s_lt_mu);
  CHECK(v.p_negative);
  CHECK(v.member);
}
