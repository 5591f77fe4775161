#include "vpl/kernel.hpp"

#include <cmath>

namespace vpl {

Sym3 landau_kernel(const Vec3& v) {
  const double r2 = dot(v, v);
  const double r = std::sqrt(r2);
  const double inv_r = 1.0 / r;
  const double inv_r3 = inv_r / r2;
  return {inv_r - v[0] * v[0] * inv_r3, inv_r - v[1] * v[1] * inv_r3,
          inv_r - v[2] * v[2] * inv_r3, -v[0] * v[1] * inv_r3,
          -v[0] * v[2] * inv_r3,        -v[1] * v[2] * inv_r3};
}

namespace {

// Potential at the center of the unit cube, int_{[-1/2,1/2]^3} du/|u|.
// Octant + Duffy transform removes the corner singularity; tensor
// Gauss-Legendre then converges rapidly. Doubles the order until stable.
double unit_cube_center_potential() {
  auto gauss = [](int m, std::vector<double>& x, std::vector<double>& w) {
    // Nodes/weights on [0,1] by Newton iteration on Legendre polynomials.
    x.resize(m);
    w.resize(m);
    for (int i = 0; i < m; ++i) {
      double t = std::cos(M_PI * (i + 0.75) / (m + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= m; ++k) {
          const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const double dp = m * (t * p1 - p0) / (t * t - 1.0);
        const double dt = p1 / dp;
        t -= dt;
        if (std::abs(dt) < 1e-15) break;
      }
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = m * (t * p1 - p0) / (t * t - 1.0);
      x[i] = 0.5 * (1.0 + t);
      w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
  };

  double prev = 0.0;
  for (int m = 8; m <= 64; m *= 2) {
    std::vector<double> x, w;
    gauss(m, x, w);
    // One octant [0,1/2]^3 split into 3 Duffy cones by the largest
    // coordinate; by symmetry integrate one cone and multiply by 3.
    // Cone: u = (t, t y, t z)/2 with t,y,z in [0,1]; |J| = t^2/8,
    // 1/|u| = 2/(t sqrt(1+y^2+z^2)) -> integrand t/(4 sqrt(1+y^2+z^2)).
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          const double t = x[i], y = x[j], z = x[k];
          acc += w[i] * w[j] * w[k] * t /
                 (4.0 * std::sqrt(1.0 + y * y + z * z));
        }
    const double val = 24.0 * acc;  // 8 octants * 3 cones
    if (std::abs(val - prev) < 1e-13) return val;
    prev = val;
  }
  return prev;
}

}  // namespace

double kernel_cell_average_diagonal(double h) {
  static const double c1 = unit_cube_center_potential();
  return 2.0 * c1 / (3.0 * h);
}

KernelTable::KernelTable(const VelocityGrid& grid)
    : grid_(&grid), ext_(2 * grid.n_per_axis() - 1) {
  const int n1 = grid.n_per_axis() - 1;
  const double h = grid.spacing();
  data_.resize(static_cast<std::size_t>(ext_) * ext_ * ext_);
  for (int dx = -n1; dx <= n1; ++dx)
    for (int dy = -n1; dy <= n1; ++dy)
      for (int dz = -n1; dz <= n1; ++dz) {
        Sym3& out = data_[offset(dx, dy, dz)];
        if (dx == 0 && dy == 0 && dz == 0) {
          const double d = kernel_cell_average_diagonal(h);
          out = {d, d, d, 0.0, 0.0, 0.0};
        } else {
          out = landau_kernel({dx * h, dy * h, dz * h});
        }
      }
}

}  // namespace vpl
