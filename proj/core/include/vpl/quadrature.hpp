#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace vpl {

/// Composite 16-point Gauss-Legendre, panel count doubled until the value
/// settles to rel_tol.
inline double adaptive_gauss(const std::function<double(double)>& f, double a,
                             double b, double rel_tol = 1e-9,
                             int max_panels = 1 << 16) {
  static const double kX[8] = {
      0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
      0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
      0.9445750230732326, 0.9894009349916499};
  static const double kW[8] = {
      0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
      0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
      0.0622535239386479, 0.0271524594117541};

  auto panelised = [&](int panels) {
    const double h = (b - a) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * h, half = 0.5 * h;
      double local = 0.0;
      for (int i = 0; i < 8; ++i)
        local += kW[i] * (f(mid + half * kX[i]) + f(mid - half * kX[i]));
      acc += local * half;
    }
    return acc;
  };

  double prev = panelised(1);
  for (int panels = 2; panels <= max_panels; panels *= 2) {
    const double cur = panelised(panels);
    if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300))
      return cur;
    prev = cur;
  }
  throw std::runtime_error("adaptive_gauss: no convergence");
}

}  // namespace vpl
