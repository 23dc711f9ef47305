#include <doctest.h>

#include <cmath>

#include "dpnls/error.hpp"
#include "dpnls/model.hpp"

using namespace dpnls;

TEST_CASE("gamma curve and threshold values") {
  CHECK(gamma_curve(1, 1.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(gamma_curve(1, 2.0) == doctest::Approx(3.4).epsilon(1e-12));
  CHECK(std::abs(p_threshold(1) - (4.0 * std::sqrt(2.0) - 3.0)) < 1e-10);
  CHECK(std::abs(p_threshold(2) - 2.0) < 1e-10);
  for (int n = 1; n <= 5; ++n) {
    const double pn = p_threshold(n);
    CHECK(std::abs(gamma_curve(n, pn) - pn) < 1e-10);
  }
}

TEST_CASE("planar boundary is the line q = 4 - p") {
  for (double p : {1.1, 1.5, 2.0, 2.7}) CHECK(std::abs(gamma_curve(2, p) - (4.0 - p)) < 1e-12);
}

TEST_CASE("admissibility") {
  ModelParams m{1, 3.0, 2.0, 0.0};
  try {
    m.validate();
    FAIL("accepted q < p");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidParams);
    CHECK(std::string(e.what()) == "q must exceed p");
  }
  CHECK_THROWS_AS((ModelParams{3, 2.0, 5.0, 0.0}.validate()), Error);
  CHECK_THROWS_AS((ModelParams{1, 2.0, 3.0, -1.0}.validate()), Error);
  CHECK_NOTHROW((ModelParams{2, 2.0, 40.0, 0.0}.validate()));
  CHECK(is_validation_error(ErrorKind::InvalidParams));
  CHECK_FALSE(is_validation_error(ErrorKind::NonFinite));
}

TEST_CASE("critical and decay exponents") {
  ModelParams m{3, 3.5, 4.0, 0.0};
  CHECK(*m.p_star() == doctest::Approx(3.0));
  CHECK(*m.critical_exponent() == doctest::Approx(5.0));
  CHECK(m.rho() == doctest::Approx(1.0));
  CHECK_FALSE(ModelParams{1, 2.0, 3.0, 0.0}.p_star().has_value());
  CHECK(expected_decay(ModelParams{1, 3.0, 5.0, 0.0}).exponent == doctest::Approx(1.0));
  CHECK(l2_membership(1, 3.0));
  CHECK(l2_membership(3, 2.0));
  CHECK_FALSE(l2_membership(3, 3.5));
}

TEST_CASE("regime labels") {
  CHECK(classify_regime({1, 2.0, 5.0, 1.0}).tag == Regime::StronglyUnstable);
  CHECK(classify_regime({1, 2.0, 4.8, 0.01}).tag == Regime::UnstableSmallOmega);
  CHECK(classify_regime({1, 2.0, 3.0, 1.0}).tag == Regime::Unknown);
  CHECK_FALSE(classify_regime({1, 2.0, 5.0, 1.0}).citation.empty());
}
