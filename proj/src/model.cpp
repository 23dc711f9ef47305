#include "dpnls/model.hpp"

#include <cmath>
#include <sstream>

#include "dpnls/error.hpp"

namespace dpnls {

namespace {

constexpr double kExponentRelTol = 1e-12;

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= kExponentRelTol * std::max(std::abs(a), std::abs(b));
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::InvalidParams, msg); }

}  // namespace

std::optional<double> sobolev_exponent(int dim) {
  if (dim <= 2) return std::nullopt;
  return (dim + 2.0) / (dim - 2.0);
}

void ModelParams::validate() const {
  if (dim < 1) invalid("dimension must be a positive integer");
  if (!std::isfinite(p) || !std::isfinite(q) || !std::isfinite(omega)) invalid("parameters must be finite");
  if (!(p > 1.0)) invalid("p must exceed 1");
  if (!(q > p)) invalid("q must exceed p");
  if (auto top = sobolev_exponent(dim); top && !(q < *top)) {
    std::ostringstream os;
    os << "q must be below the Sobolev exponent " << *top << " for N = " << dim;
    invalid(os.str());
  }
  if (!(omega >= 0.0)) invalid("omega must be nonnegative");
}

double ModelParams::rho() const { return std::max(2.0 / (p - 1.0), dim - 2.0); }

std::optional<double> ModelParams::p_star() const {
  if (dim <= 2) return std::nullopt;
  return static_cast<double>(dim) / (dim - 2.0);
}

std::optional<double> ModelParams::critical_exponent() const { return sobolev_exponent(dim); }

double ModelParams::sphere_area() const {
  const double half = dim / 2.0;
  return 2.0 * std::pow(M_PI, half) / std::tgamma(half);
}

double gamma_curve(int dim, double p) {
  if (dim < 1) throw Error(ErrorKind::Domain, "gamma_curve: dimension must be positive");
  const double n = dim;
  const double denom = n * (n + 2.0 - (n - 2.0) * p);
  if (!std::isfinite(p) || !(denom > 0.0)) {
    throw Error(ErrorKind::Domain, "gamma_curve: denominator N(N+2-(N-2)p) must be positive");
  }
  return (16.0 + n * n + 6.0 * n - p * n * (n + 2.0)) / denom;
}

double p_threshold(int dim) {
  if (dim < 1) throw Error(ErrorKind::Domain, "p_threshold: dimension must be positive");
  const double sn = std::sqrt(static_cast<double>(dim));
  return (dim + std::sqrt(2.0 * dim) + 4.0) / (sn * (sn + std::sqrt(2.0)));
}

bool l2_membership(int dim, double p) {
  if (dim <= 3) return p < 1.0 + 4.0 / dim;
  if (dim == 4) return p <= 2.0;
  return true;
}

bool is_log_critical(const ModelParams& params) {
  const auto ps = params.p_star();
  return ps && nearly_equal(params.p, *ps);
}

TailLaw expected_decay(const ModelParams& params) {
  if (params.omega != 0.0) throw Error(ErrorKind::Domain, "expected_decay requires omega = 0");
  const auto ps = params.p_star();
  const double n = params.dim;
  if (is_log_critical(params)) return {n - 2.0, (n - 2.0) / 2.0};
  if (!ps || params.p < *ps) return {2.0 / (params.p - 1.0), 0.0};
  return {n - 2.0, 0.0};
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::StronglyUnstable: return "StronglyUnstable";
    case Regime::UnstableSmallOmega: return "UnstableSmallOmega";
    case Regime::StableLargeOmegaCited: return "StableLargeOmegaCited";
    case Regime::Unknown: return "Unknown";
  }
  return "Unknown";
}

RegimeLabel classify_regime(const ModelParams& params, const RegimeThresholds& thresholds) {
  params.validate();
  const double pc = params.p_c();
  if (params.q >= pc || nearly_equal(params.q, pc)) {
    return {Regime::StronglyUnstable,
            "strong instability by blowup: q >= 1+4/N, every omega >= 0"};
  }
  if (params.q > gamma_curve(params.dim, params.p) && params.omega <= thresholds.omega_small) {
    return {Regime::UnstableSmallOmega,
            "orbital instability: gamma_N(p) < q < 1+4/N and small omega"};
  }
  if (params.omega >= thresholds.omega_large) {
    return {Regime::StableLargeOmegaCited,
            "known perturbative result, not computed here: stable for large omega when q < 1+4/N"};
  }
  return {Regime::Unknown, {}};
}

}  // namespace dpnls
