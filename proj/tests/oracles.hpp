#pragma once

#include <cmath>

// Independent reference values. Computed outside the library (hand derivations,
// mpmath at 30 digits) and frozen here.
namespace oracle {

// One-dimensional first integral: φ'²/2 = ωφ²/2 + φ^{p+1}/(p+1) − φ^{q+1}/(q+1)
// vanishes at the top, so φ(0) is the positive root of
// ω/2 + s^{p−1}/(p+1) − s^{q−1}/(q+1). Plain bisection, nothing shared with the solver.
inline double first_integral_amplitude(double p, double q, double omega) {
  auto f = [&](double s) { return omega / 2 + std::pow(s, p - 1) / (p + 1) - std::pow(s, q - 1) / (q + 1); };
  double lo = 1e-3, hi = 1.0;
  while (f(hi) > 0) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// q = 2p−1: φ₀ = A(1 + Br²)^{−1/(p−1)} with k = 1/(p−1),
// A^{p−1} = 2(k+1)/(2k+2−N), B = A^{2(p−1)}/(4k(k+1)).
struct Explicit {
  double A, B, p;
  double operator()(double r) const { return A * std::pow(1 + B * r * r, -1 / (p - 1)); }
};
inline Explicit explicit_profile(int dim, double p) {
  const double k = 1 / (p - 1);
  const double A = std::pow(2 * (k + 1) / (2 * k + 2 - dim), k);
  return {A, std::pow(A, 2 * (p - 1)) / (4 * k * (k + 1)), p};
}

// (N, p, q, ω) = (1, 3, 5, 0), φ = (r²/2 + 2/3)^{−1/2}: whole-line integrals.
inline constexpr double kGrad135 = 0.510131071190873770;
inline constexpr double kLp1_135 = 4.08104856952699016;
inline constexpr double kLq1_135 = 4.59117964071786393;
inline constexpr double kAmp135 = 1.22474487139158905;  // √1.5

}  // namespace oracle
