#include <doctest.h>

#include <random>

#include "dpnls/error.hpp"
#include "dpnls/groundstate.hpp"
#include "oracles.hpp"

using namespace dpnls;

TEST_CASE("amplitude of the exact zero-frequency state") {
  const auto prof = solve_ground_state({1, 3.0, 5.0, 0.0});
  CHECK(std::abs(prof.amplitude() - oracle::kAmp135) < 1e-8);
  CHECK(std::abs(oracle::first_integral_amplitude(3, 5, 0) - oracle::kAmp135) < 1e-12);
}

TEST_CASE("amplitudes match the first integral on random triples") {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> up(1.2, 4.0), gap(0.3, 3.0), om(0.0, 2.0);
  for (int i = 0; i < 4; ++i) {
    const double p = up(rng), q = p + gap(rng), w = om(rng);
    CAPTURE(p);
    CAPTURE(q);
    CAPTURE(w);
    const auto prof = solve_ground_state({1, p, q, w});
    CHECK(std::abs(prof.amplitude() - oracle::first_integral_amplitude(p, q, w)) < 1e-8);
  }
}

TEST_CASE("explicit profiles for q = 2p - 1") {
  for (int dim : {2, 3}) {
    CAPTURE(dim);
    const auto ex = oracle::explicit_profile(dim, 2.0);
    CHECK(ex.A == doctest::Approx(dim == 2 ? 2.0 : 4.0));
    const auto prof = solve_ground_state({dim, 2.0, 3.0, 0.0});
    CHECK(std::abs(prof.amplitude() - ex.A) < 1e-8 * ex.A);
    for (double r : {0.5, 2.0, 10.0}) CHECK(evaluate(prof, r) == doctest::Approx(ex(r)).epsilon(1e-6));
  }
}

TEST_CASE("profile is positive and decreasing") {
  const auto prof = solve_ground_state({1, 2.0, 3.0, 1.0});
  for (std::size_t i = 1; i < prof.size(); ++i) {
    REQUIRE(prof.phi[i] > 0.0);
    REQUIRE(prof.phi[i] <= prof.phi[i - 1]);
  }
  CHECK(prof.tail.kind == TailKind::Exponential);
}

TEST_CASE("trajectory classification brackets the amplitude") {
  const ModelParams m{1, 2.0, 3.0, 1.0};
  const double s = oracle::first_integral_amplitude(2, 3, 1);
  CHECK(classify_trajectory(s * 1.01, m, {}) == Trajectory::Overshoot);
  CHECK(classify_trajectory(s * 0.99, m, {}) == Trajectory::Undershoot);
}

TEST_CASE("rescalings") {
  const auto prof = solve_ground_state({1, 2.0, 3.0, 1.0});
  const auto a = scale_amplitude(prof, 1.5);
  const auto l = scale_l2(prof, 2.0);
  CHECK(evaluate(a, 0.7) == doctest::Approx(1.5 * evaluate(prof, 0.7)));
  CHECK(evaluate(l, 0.7) == doctest::Approx(std::sqrt(2.0) * evaluate(prof, 1.4)));
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(solve_ground_state({1, 3.0, 2.0, 0.0}), Error);
  ShootingConfig bad;
  bad.amp_hi = 0.1;
  CHECK_THROWS_AS(bad.validate(), Error);
}
