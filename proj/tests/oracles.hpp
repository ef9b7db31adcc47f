// Test-only oracles, independent of the library's integration machinery:
// closed-form Schwarzschild bending via quadrature of the orbit equation.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Photon orbit potential P(u) = 1/b^2 - u^2 + rs u^3, u = 1/r, b = L/E.
// u_turn is the smallest positive root (the turning point of the orbit).
inline double turning_point(double b, double rs = 1.0) {
  double u = 1.0 / b;
  for (int i = 0; i < 80; ++i) {
    const double p = 1.0 / (b * b) - u * u + rs * u * u * u;
    const double dp = -2.0 * u + 3.0 * rs * u * u;
    const double step = p / dp;
    u -= step;
    if (std::abs(step) < 1e-16 * u) break;
  }
  return u;
}

// integral of du / sqrt(P(u)) from u1 to the turning point u0, with the
// endpoint singularity removed by the substitution u = u0 - t^2
inline double sweep_to_turning(double u1, double b, double rs = 1.0) {
  const double u0 = turning_point(b, rs);
  if (u1 > u0) throw std::runtime_error("start radius inside the turning point");
  // P(u) = -(u0 - u) (rs u^2 + c1 u + c0) by synthetic division
  const double c1 = rs * u0 - 1.0;
  const double c0 = u0 * c1;
  auto integrand = [&](double t) {
    const double u = u0 - t * t;
    const double q = -(rs * u * u + c1 * u + c0);
    return 2.0 / std::sqrt(q);
  };
  return integrate(integrand, 0.0, std::sqrt(u0 - u1));
}

// Asymptotic bending angle of a photon with impact parameter b.
inline double deflection_asymptotic(double b, double rs = 1.0) {
  const double pi = 3.14159265358979323846264338327950288;
  return 2.0 * sweep_to_turning(0.0, b, rs) - pi;
}

// Bending measured between local orthonormal momentum directions at entry
// radius r0 and exit radius r1 (finite-aperture measurement).
inline double deflection_measured(double b, double r0, double r1, double rs = 1.0) {
  const double pi = 3.14159265358979323846264338327950288;
  const double sweep = sweep_to_turning(1.0 / r0, b, rs) + sweep_to_turning(1.0 / r1, b, rs);
  const double chi0 = std::asin(b * std::sqrt(1.0 - rs / r0) / r0);
  const double chi1 = std::asin(b * std::sqrt(1.0 - rs / r1) / r1);
  return sweep + chi0 + chi1 - pi;
}

}  // namespace oracle
