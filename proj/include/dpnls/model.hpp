#pragma once

#include <optional>
#include <string>

namespace dpnls {

/// Problem parameters for  i u_t + Δu − |u|^{p−1}u + |u|^{q−1}u = 0  in R^N
/// and its standing waves e^{iωt}φ_ω.
struct ModelParams {
  int dim = 1;
  double p = 3.0;
  double q = 5.0;
  double omega = 0.0;

  /// Throws Error(InvalidParams) unless 1 < p < q < 2*−1 and omega ≥ 0.
  void validate() const;

  /// N(p−1)/2, the scaling weight of the L^{p+1} term under v^λ = λ^{N/2}v(λx).
  double alpha() const { return dim * (p - 1.0) / 2.0; }
  double beta() const { return dim * (q - 1.0) / 2.0; }
  /// Mass-critical exponent 1 + 4/N.
  double p_c() const { return 1.0 + 4.0 / dim; }
  /// max{2/(p−1), N−2}, the uniform algebraic decay rate.
  double rho() const;
  /// N/(N−2) for N ≥ 3; unbounded (nullopt) for N ≤ 2.
  std::optional<double> p_star() const;
  /// 2*−1 = (N+2)/(N−2) for N ≥ 3; unbounded (nullopt) for N ≤ 2.
  std::optional<double> critical_exponent() const;
  /// |S^{N−1}|, the radial quadrature weight (2 for N = 1).
  double sphere_area() const;
};

/// Upper admissible exponent 2*−1; nullopt encodes the unbounded case N ≤ 2.
std::optional<double> sobolev_exponent(int dim);

/// The instability boundary  γ_N(p) = (16 + N² + 6N − pN(N+2)) / (N(N+2−(N−2)p)).
double gamma_curve(int dim, double p);

/// Unique fixed point p_N of γ_N.
double p_threshold(int dim);

/// Whether the zero-frequency ground state φ_0 lies in L².
bool l2_membership(int dim, double p);

struct TailLaw {
  double exponent = 0.0;   // φ_0(r) ~ r^{-exponent} (log r)^{-log_power}
  double log_power = 0.0;
};

/// Far-field law of φ_0; requires omega == 0.
TailLaw expected_decay(const ModelParams& params);

/// p == p* up to the configured relative tolerance (never for N ≤ 2).
bool is_log_critical(const ModelParams& params);

enum class Regime { StronglyUnstable, UnstableSmallOmega, StableLargeOmegaCited, Unknown };

struct RegimeLabel {
  Regime tag = Regime::Unknown;
  std::string citation;
};

std::string to_string(Regime regime);

struct RegimeThresholds {
  double omega_small = 0.1;   // ω₀: small-frequency instability window
  double omega_large = 10.0;  // ω₁: cited large-frequency stability
};

RegimeLabel classify_regime(const ModelParams& params, const RegimeThresholds& thresholds = {});

}  // namespace dpnls
