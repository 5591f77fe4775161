#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vpl/rng.hpp>
#include <vpl/velocity_ops.hpp>

#include "support/radial_quad.hpp"

using namespace vpl;

namespace {
double maxwell_radial(double r) {
  return 0.06349363593424097 * std::exp(-0.5 * r * r);
}
}  // namespace

TEST_CASE("grid rejects bad parameters") {
  CHECK_THROWS(VelocityGrid(6.0, 6));
  CHECK_THROWS(VelocityGrid(6.0, 9));
  CHECK_THROWS(VelocityGrid(-1.0, 16));
  VelocityGrid g(6.0, 16);
  CHECK(g.spacing() == doctest::Approx(0.75));
  // cell-centered: no node at the origin
  for (std::size_t m = 0; m < g.size(); ++m) CHECK(norm(g.node(m)) > 0.0);
}

TEST_CASE("maxwellian value, symmetry and mass") {
  VelocityGrid g(6.0, 32);
  RealField mu = maxwellian(g);

  // node nearest the origin carries approximately (2 pi)^{-3/2}
  std::size_t best = 0;
  for (std::size_t m = 0; m < g.size(); ++m)
    if (norm(g.node(m)) < norm(g.node(best))) best = m;
  const double h = g.spacing();
  CHECK(mu[best] == doctest::Approx(0.06349363593424097).epsilon(h * h));

  // even symmetry is exact on the symmetric lattice
  const int n = g.n_per_axis();
  for (int i = 0; i < n; ++i)
    CHECK(mu[g.index(i, 3, 5)] == mu[g.index(n - 1 - i, n - 1 - 3, n - 1 - 5)]);

  // discrete mass against the analytic normalization (radial oracle)
  const double mass_oracle = vpl_test::radial_integral(maxwell_radial, 30.0);
  CHECK(mass_oracle == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(maxwellian_mass_defect(g)) < 1e-6);
}

TEST_CASE("weighted norms") {
  VelocityGrid g(6.0, 32);
  RealField rt = sqrt_maxwellian(g);

  SUBCASE("weight 1 reduces to the plain L2 norm") {
    Rng rng(7);
    RealField f = random_smooth_field(g, rng);
    CHECK(weighted_lp_norm(f, 2, WeightSpec::power(0.0)) ==
          doctest::Approx(l2_norm(f)).epsilon(1e-14));
  }
  SUBCASE("|sqrt(mu)|_2^2 = 1 within the mass tolerance") {
    const double n2 = weighted_lp_norm(rt, 2, WeightSpec{0.0});
    CHECK(n2 * n2 == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("|sqrt(mu)|_{2,w4}^2 matches the radial quadrature of <v>^8 mu") {
    const double oracle = vpl_test::radial_integral(
        [](double r) {
          const double b = 1.0 + r * r;
          return b * b * b * b * maxwell_radial(r);
        },
        30.0);
    CHECK(oracle == doctest::Approx(1468.0).epsilon(1e-9));  // exact moment
    const double val = weighted_lp_norm(rt, 2, WeightSpec::power(4.0));
    CHECK(val * val == doctest::Approx(oracle).epsilon(1e-4));
  }
  SUBCASE("invalid p rejected") {
    CHECK_THROWS(weighted_lp_norm(rt, 3, WeightSpec{0.0}));
  }
  SUBCASE("w(alpha,beta) requires l >= |alpha|+|beta|") {
    CHECK_THROWS(WeightSpec::alpha_beta(1.0, 1, 1));
    CHECK(WeightSpec::alpha_beta(3.0, 1, 1).ell == doctest::Approx(2.0));
  }
  SUBCASE("norm monotonicity in the weight exponent") {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
      RealField f = random_smooth_field(g, rng);
      const double n1 = weighted_lp_norm(f, 2, WeightSpec::power(1.0));
      const double n3 = weighted_lp_norm(f, 2, WeightSpec::power(3.0));
      CHECK(n1 <= n3 * (1.0 + 1e-14));
    }
  }
}

TEST_CASE("gradient stencils") {
  VelocityGrid g(4.0, 16);

  SUBCASE("linear functions differentiate exactly everywhere") {
    RealField f(g);
    for (std::size_t m = 0; m < g.size(); ++m) {
      const Vec3 v = g.node(m);
      f[m] = 2.0 * v[0] - 3.0 * v[1] + 0.5 * v[2] + 1.0;
    }
    const auto grad = v_gradient(f);
    for (std::size_t m = 0; m < g.size(); ++m) {
      CHECK(grad[0][m] == doctest::Approx(2.0).epsilon(1e-12));
      CHECK(grad[1][m] == doctest::Approx(-3.0).epsilon(1e-12));
      CHECK(grad[2][m] == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
  SUBCASE("constants have zero gradient") {
    RealField f(g);
    for (auto& x : f.values) x = 4.2;
    const auto grad = v_gradient(f);
    for (int c = 0; c < 3; ++c)
      for (auto x : grad[c].values) CHECK(x == doctest::Approx(0.0));
  }
  SUBCASE("grad mu converges at second order against -v mu") {
    auto interior_err = [](int n) {
      VelocityGrid gg(4.0, n);
      const auto grad = v_gradient(maxwellian(gg));
      const RealField mu = maxwellian(gg);
      double err = 0.0;
      for (std::size_t m = 0; m < gg.size(); ++m) {
        const Vec3 v = gg.node(m);
        if (std::abs(v[0]) > 3.0 || std::abs(v[1]) > 3.0 || std::abs(v[2]) > 3.0)
          continue;
        for (int c = 0; c < 3; ++c)
          err = std::max(err, std::abs(grad[c][m] + v[c] * mu[m]));
      }
      return err;
    };
    const double ratio = interior_err(16) / interior_err(32);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
  }
}

TEST_CASE("sigma norm") {
  SUBCASE("zero field") {
    VelocityGrid g(6.0, 16);
    RealField z(g);
    CHECK(sigma_norm(z) == doctest::Approx(0.0));
  }
  SUBCASE("cross component of a radial field vanishes at O(h^2)") {
    auto cross_mass = [](int n) {
      VelocityGrid g(6.0, n);
      const RealField rt = sqrt_maxwellian(g);
      const auto grad = v_gradient(rt);
      double acc = 0.0;
      for (std::size_t m = 0; m < g.size(); ++m) {
        const Vec3 v = g.node(m);
        const double r = norm(v);
        const double cx = (grad[1][m] * v[2] - grad[2][m] * v[1]) / r;
        const double cy = (grad[2][m] * v[0] - grad[0][m] * v[2]) / r;
        const double cz = (grad[0][m] * v[1] - grad[1][m] * v[0]) / r;
        acc += (cx * cx + cy * cy + cz * cz) * g.weight();
      }
      return std::sqrt(acc);
    };
    const double c16 = cross_mass(16), c32 = cross_mass(32);
    CHECK(c16 / c32 > 3.0);  // L2 of an O(h^2) quantity
  }
  SUBCASE("|sqrt(mu)|_sigma matches the analytic-gradient radial oracle") {
    // oracle uses grad sqrt(mu) = -(v/2) sqrt(mu): radial part only
    const double c0 = vpl_test::radial_integral(
        [](double r) { return maxwell_radial(r) / (1.0 + r * r); }, 8.0);
    const double c1 = vpl_test::radial_integral(
        [](double r) {
          const double b = 1.0 + r * r;
          return 0.25 * r * r * maxwell_radial(r) / (b * b * b);
        },
        8.0);
    const double oracle = std::sqrt(c0) + std::sqrt(c1);
    VelocityGrid g(6.0, 160);
    const double val = sigma_norm(sqrt_maxwellian(g));
    CHECK(val == doctest::Approx(oracle).epsilon(1e-3));
  }
}

TEST_CASE("projection onto the radial direction") {
  VelocityGrid g(4.0, 12);
  SUBCASE("g(v) = v is a fixed point") {
    std::array<RealField, 3> f{RealField(g), RealField(g), RealField(g)};
    for (std::size_t m = 0; m < g.size(); ++m) {
      const Vec3 v = g.node(m);
      for (int c = 0; c < 3; ++c) f[c][m] = v[c];
    }
    const auto p = pv_project(f);
    for (int c = 0; c < 3; ++c)
      for (std::size_t m = 0; m < g.size(); ++m)
        CHECK(p[c][m] == doctest::Approx(f[c][m]).epsilon(1e-13));
  }
  SUBCASE("fields orthogonal to v map to zero") {
    std::array<RealField, 3> f{RealField(g), RealField(g), RealField(g)};
    for (std::size_t m = 0; m < g.size(); ++m) {
      const Vec3 v = g.node(m);
      f[0][m] = -v[1];
      f[1][m] = v[0];
      f[2][m] = 0.0;
    }
    const auto p = pv_project(f);
    for (int c = 0; c < 3; ++c)
      for (std::size_t m = 0; m < g.size(); ++m)
        CHECK(std::abs(p[c][m]) < 1e-12);
  }
  SUBCASE("idempotence and the Pythagoras split") {
    Rng rng(3);
    std::array<RealField, 3> f{random_smooth_field(g, rng),
                               random_smooth_field(g, rng),
                               random_smooth_field(g, rng)};
    const auto p = pv_project(f);
    const auto pp = pv_project(p);
    double g2 = 0.0, p2 = 0.0, q2 = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m)
      for (int c = 0; c < 3; ++c) {
        CHECK(pp[c][m] == doctest::Approx(p[c][m]).epsilon(1e-12));
        g2 += f[c][m] * f[c][m];
        p2 += p[c][m] * p[c][m];
        const double q = f[c][m] - p[c][m];
        q2 += q * q;
      }
    CHECK(g2 == doctest::Approx(p2 + q2).epsilon(1e-12));
  }
}

TEST_CASE("quadrature of smooth concentrated integrands converges at order >= 2") {
  auto value = [](int n) {
    VelocityGrid g(6.0, n);
    double acc = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) {
      const Vec3 v = g.node(m);
      acc += std::cos(v[0]) * std::exp(-dot(v, v));
    }
    return acc * g.weight();
  };
  const double exact = vpl_test::adaptive_simpson(
                           [](double x) { return std::cos(x) * std::exp(-x * x); },
                           -6.0, 6.0) *
                       std::pow(vpl_test::adaptive_simpson(
                                    [](double x) { return std::exp(-x * x); },
                                    -6.0, 6.0),
                                2.0);
  const double e1 = std::abs(value(12) - exact);
  const double e2 = std::abs(value(24) - exact);
  CHECK(e2 < e1 / 4.0 + 1e-14);
}
