#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

#include "vpl/collision.hpp"

namespace vpl {

/// Dense matrix form of the linearized operator, assembled from the pair
/// Dirichlet form
///   <h, L g> = 1/2 sum_{s,s'} \int\int mu mu* Phi(v-v*)
///              [D(g_{s'}/rt_mu)(v) - D(g_s/rt_mu)(v*)] .
///              [D(h_{s'}/rt_mu)(v) - D(h_s/rt_mu)(v*)],
/// which is symmetric positive semidefinite by construction and annihilates
/// the six collision invariants exactly (the difference stencils are exact
/// on quadratics and Phi(d) d = 0 holds exactly on the lattice).
///
/// In the species sum/difference basis the operator block-diagonalizes into
/// two N x N sectors; everything downstream (implicit solves, eigen probes)
/// works per sector.
class DenseCollision {
public:
  /// Assembles both sectors, loading/saving them in cache_dir when given.
  explicit DenseCollision(const VelocityGrid& grid,
                          const std::string& cache_dir = "");

  const VelocityGrid& grid() const { return *grid_; }
  const Eigen::MatrixXd& sector_sum() const { return l_sum_; }
  const Eigen::MatrixXd& sector_diff() const { return l_diff_; }

  template <class T>
  SpeciesPair<T> apply(const SpeciesPair<T>& g) const;

  /// Quadratic form <g, L g> in the grid quadrature inner product.
  template <class T>
  double quad_form(const SpeciesPair<T>& g) const;

  bool loaded_from_cache() const { return from_cache_; }

private:
  static Eigen::MatrixXd assemble_sector(const VelocityGrid& grid,
                                         const KernelTable& table, bool sum_sector);
  static std::optional<Eigen::MatrixXd> load_cache(const std::string& path,
                                                   const VelocityGrid& grid,
                                                   int sector);
  static void save_cache(const std::string& path, const VelocityGrid& grid,
                         int sector, const Eigen::MatrixXd& m);

  const VelocityGrid* grid_;
  Eigen::MatrixXd l_sum_, l_diff_;
  bool from_cache_ = false;
};

struct CoercivityReport {
  double lambda0 = 0.0;        // min of the two estimates below
  double sample_min = 0.0;     // Rayleigh minimum over random micro states
  double eig_min = 0.0;        // generalized eigenvalue on the micro subspace
  int samples = 0;
};

/// Spectral-gap style estimate <g,Lg> >= lambda0 |{I-P}g|_{sigma,w_ell}^2 on a
/// coarse grid: random-sample Rayleigh quotients plus a penalized inverse
/// iteration for the smallest generalized eigenvalue against the quadratic
/// sigma-form Gram matrix.
CoercivityReport coercivity_estimate(const DenseCollision& dense, double ell,
                                     int samples = 48, std::uint64_t seed = 12345);

}  // namespace vpl
