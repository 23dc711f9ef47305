#include <doctest.h>

#include "dpnls/error.hpp"
#include "dpnls/functionals.hpp"
#include "oracles.hpp"

using namespace dpnls;

TEST_CASE("norms of the exact zero-frequency state") {
  const ModelParams m{1, 3.0, 5.0, 0.0};
  const auto prof = solve_ground_state(m);
  const Norms n = compute_norms(prof);
  CHECK(n.gradL2_sq == doctest::Approx(oracle::kGrad135).epsilon(1e-7));
  CHECK(n.Lp1 == doctest::Approx(oracle::kLp1_135).epsilon(1e-7));
  CHECK(n.Lq1 == doctest::Approx(oracle::kLq1_135).epsilon(1e-7));
  const FunctionalReport r = report_from_norms(n, m);
  CHECK(std::abs(r.pohozaev_residual_K) < 1e-6);
  CHECK(std::abs(r.pohozaev_residual_P) < 1e-6);
}

TEST_CASE("divergent mass is flagged, or raised in strict mode") {
  // N = 3, p = 3.5: φ₀ ~ r^{-1}, so ‖φ₀‖² diverges.
  const auto prof = solve_ground_state({3, 3.5, 4.0, 0.0});
  CHECK(compute_norms(prof).l2_divergent);
  CHECK_THROWS_AS(compute_norms(prof, {true}), Error);
}

TEST_CASE("Pohozaev identities at positive frequency") {
  for (int dim : {1, 2, 3}) {
    CAPTURE(dim);
    const ModelParams m{dim, 2.0, 3.0, 0.5};
    const auto r = compute_report(solve_ground_state(m), m);
    CHECK(std::abs(r.pohozaev_residual_K) < 1e-6);
    CHECK(std::abs(r.pohozaev_residual_P) < 1e-6);
  }
}

TEST_CASE("ground state sits on both manifolds") {
  // β > 2 so the virial scaling has a single root.
  const ModelParams m{1, 2.0, 6.0, 1.0};
  const auto prof = solve_ground_state(m);
  CHECK(nehari_rescale(prof, m) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(virial_scaling_root(prof, m) == doctest::Approx(1.0).epsilon(1e-6));
  const Norms n = compute_norms(prof);
  CHECK(nehari_at(n, m, 1.0) == doctest::Approx(0.0).epsilon(1e-6 * n.gradL2_sq));
  CHECK(nehari_at(n, m, 0.5) > 0.0);
  CHECK(nehari_at(n, m, 2.0) < 0.0);
}

TEST_CASE("d(omega) increases") {
  const DCurve d = d_curve({0.0, 0.5, 1.0}, {1, 2.0, 3.0, 0.0}, {}, 2);
  CHECK(d.strictly_increasing);
  CHECK(d.positive);
  for (const auto& s : d.status) CHECK(s == "ok");
}

TEST_CASE("pointwise bound: stated form fails in one dimension, corrected form holds") {
  const ModelParams m{1, 3.0, 5.0, 0.0};
  const auto s = strauss_bound_check(solve_ground_state(m), m);
  CHECK(s.margin < 0.0);
  CHECK(s.corrected_margin >= 0.0);
  CHECK(s.sup_lhs == doctest::Approx(oracle::kAmp135).epsilon(1e-6));
}
