#pragma once

#include <cstdint>
#include <random>

#include "vpl/grid.hpp"

namespace vpl {

/// Seeded generator with explicit uniform/normal maps so streams are
/// reproducible independent of the standard library's distributions.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Smooth, rapidly decaying random field: a low-order polynomial and a
/// gentle trigonometric ripple modulated by exp(-|v|^2/4). Resolution
/// friendly on the coarse grids used by the dense probes.
inline RealField random_smooth_field(const VelocityGrid& g, Rng& rng) {
  double c0 = rng.uniform(-1.0, 1.0);
  Vec3 c1{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  Vec3 c2{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
  Vec3 ph{rng.uniform(0.0, 2.0 * M_PI), rng.uniform(0.0, 2.0 * M_PI),
          rng.uniform(0.0, 2.0 * M_PI)};
  double cs = rng.uniform(-0.5, 0.5);
  RealField f(g);
  for (std::size_t m = 0; m < g.size(); ++m) {
    const Vec3 v = g.node(m);
    double poly = c0 + dot(c1, v);
    for (int c = 0; c < 3; ++c) poly += c2[c] * v[c] * v[c];
    const double ripple = cs * std::sin(v[0] + ph[0]) * std::sin(v[1] + ph[1]) *
                          std::sin(v[2] + ph[2]);
    f[m] = (poly + ripple) * std::exp(-0.25 * dot(v, v));
  }
  return f;
}

inline RealPair random_smooth_pair(const VelocityGrid& g, Rng& rng) {
  RealPair p(g);
  p.plus = random_smooth_field(g, rng);
  p.minus = random_smooth_field(g, rng);
  return p;
}

inline ComplexPair random_smooth_complex_pair(const VelocityGrid& g, Rng& rng) {
  ComplexPair p(g);
  const RealPair re = random_smooth_pair(g, rng);
  const RealPair im = random_smooth_pair(g, rng);
  for (std::size_t m = 0; m < g.size(); ++m) {
    p.plus[m] = cplx(re.plus[m], im.plus[m]);
    p.minus[m] = cplx(re.minus[m], im.minus[m]);
  }
  return p;
}

}  // namespace vpl
