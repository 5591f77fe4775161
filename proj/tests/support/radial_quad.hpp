#pragma once

// Test-side oracle: adaptive Simpson quadrature for radial integrals
// int_0^R 4 pi r^2 f(r) dr. Deliberately a different method from the
// library's composite Gauss so the two are independent checks.

#include <cmath>
#include <functional>

namespace vpl_test {

inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb, double whole,
                          double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

/// int 4 pi r^2 g(r) dr over [0, R].
inline double radial_integral(const std::function<double(double)>& g, double R,
                              double tol = 1e-12) {
  return adaptive_simpson(
      [&](double r) { return 4.0 * M_PI * r * r * g(r); }, 0.0, R, tol);
}

}  // namespace vpl_test
