#pragma once

#include "vpl/grid.hpp"

namespace vpl {

/// 3x3 symmetric matrix stored as {xx, yy, zz, xy, xz, yz}.
using Sym3 = std::array<double, 6>;

inline double sym3_quad(const Sym3& m, const Vec3& a, const Vec3& b) {
  return m[0] * a[0] * b[0] + m[1] * a[1] * b[1] + m[2] * a[2] * b[2] +
         m[3] * (a[0] * b[1] + a[1] * b[0]) +
         m[4] * (a[0] * b[2] + a[2] * b[0]) +
         m[5] * (a[1] * b[2] + a[2] * b[1]);
}

/// Coulomb grazing-collision kernel (1/|v|)(I - v v^T/|v|^2); |v| > 0.
Sym3 landau_kernel(const Vec3& v);

/// Diagonal of the kernel averaged over the cube [-h/2,h/2]^3: (2 C1 / 3h),
/// where C1 is the potential at the center of the unit cube, computed once
/// by high-order quadrature. Off-diagonals average to zero by symmetry.
double kernel_cell_average_diagonal(double h);

/// Kernel samples on the difference lattice d in [-(n-1), n-1]^3 scaled by
/// the grid spacing. The d = 0 entry holds the cell-averaged kernel so the
/// integrable singularity contributes its exact leading-order cell mass.
class KernelTable {
public:
  explicit KernelTable(const VelocityGrid& grid);

  const VelocityGrid& grid() const { return *grid_; }
  int extent() const { return ext_; }  // entries per axis: 2n-1

  const Sym3& at(int dx, int dy, int dz) const {
    return data_[offset(dx, dy, dz)];
  }
  /// Component c in {0..5} at difference (dx,dy,dz).
  double component(int c, int dx, int dy, int dz) const {
    return data_[offset(dx, dy, dz)][c];
  }

private:
  std::size_t offset(int dx, int dy, int dz) const {
    const int n1 = grid_->n_per_axis() - 1;
    return (static_cast<std::size_t>(dx + n1) * ext_ + (dy + n1)) * ext_ +
           (dz + n1);
  }

  const VelocityGrid* grid_;
  int ext_;
  std::vector<Sym3> data_;
};

}  // namespace vpl
