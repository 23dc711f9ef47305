#pragma once

#include <array>
#include <cmath>

namespace dpnls::detail {

/// One Dormand–Prince 5(4) step for a planar system y' = f(t, y).
/// Returns the 5th-order solution and writes the embedded error estimate.
template <typename Real, typename Rhs>
std::array<Real, 2> dopri5_step(const Rhs& f, Real t, const std::array<Real, 2>& y, Real h,
                                std::array<Real, 2>& err) {
  using V = std::array<Real, 2>;
  constexpr Real c2 = Real(1) / 5, c3 = Real(3) / 10, c4 = Real(4) / 5, c5 = Real(8) / 9;
  constexpr Real a21 = Real(1) / 5;
  constexpr Real a31 = Real(3) / 40, a32 = Real(9) / 40;
  constexpr Real a41 = Real(44) / 45, a42 = Real(-56) / 15, a43 = Real(32) / 9;
  constexpr Real a51 = Real(19372) / 6561, a52 = Real(-25360) / 2187, a53 = Real(64448) / 6561,
                 a54 = Real(-212) / 729;
  constexpr Real a61 = Real(9017) / 3168, a62 = Real(-355) / 33, a63 = Real(46732) / 5247,
                 a64 = Real(49) / 176, a65 = Real(-5103) / 18656;
  constexpr Real b1 = Real(35) / 384, b3 = Real(500) / 1113, b4 = Real(125) / 192,
                 b5 = Real(-2187) / 6784, b6 = Real(11) / 84;
  constexpr Real e1 = Real(71) / 57600, e3 = Real(-71) / 16695, e4 = Real(71) / 1920,
                 e5 = Real(-17253) / 339200, e6 = Real(22) / 525, e7 = Real(-1) / 40;

  auto axpy = [&](std::initializer_list<std::pair<Real, const V*>> terms) {
    V out = y;
    for (const auto& [coef, k] : terms) {
      out[0] += h * coef * (*k)[0];
      out[1] += h * coef * (*k)[1];
    }
    return out;
  };

  const V k1 = f(t, y);
  const V k2 = f(t + c2 * h, axpy({{a21, &k1}}));
  const V k3 = f(t + c3 * h, axpy({{a31, &k1}, {a32, &k2}}));
  const V k4 = f(t + c4 * h, axpy({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const V k5 = f(t + c5 * h, axpy({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const V k6 = f(t + h, axpy({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  const V y5 = axpy({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const V k7 = f(t + h, y5);
  for (int i = 0; i < 2; ++i) {
    err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  }
  return y5;
}

}  // namespace dpnls::detail
