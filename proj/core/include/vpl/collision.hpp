#pragma once

#include <memory>

#include "vpl/convolution.hpp"
#include "vpl/velocity_ops.hpp"

namespace vpl {

/// Bilinear collision operator and its linearization about the Maxwellian.
///
/// collide() is the raw double-sum discretization in flux-divergence form,
/// so the discrete mass of Q vanishes to roundoff and the v / |v|^2 moments
/// cancel by the double-sum antisymmetry. The linearized pieces divide the
/// Maxwellian factors through analytically and never amplify tail roundoff:
///   A g_pm = (2/sqrt(mu)) Q(mu, sqrt(mu) g_pm)
///   K g    = (1/sqrt(mu)) Q(sqrt(mu)(g_+ + g_-), mu)
///   L g    = -(A g + K g)
///   Gamma(g,h)_pm = (1/sqrt(mu)) Q(sqrt(mu)(g_+ + g_-), sqrt(mu) h_pm)
class CollisionOperator {
public:
  explicit CollisionOperator(const VelocityGrid& grid, bool use_fft = true,
                             double overflow_cap = 1e30);

  const VelocityGrid& grid() const { return *grid_; }
  const KernelTable& kernel_table() const { return table_; }
  const ConvolutionEngine& engine() const { return engine_; }

  /// Q(G, H): G supplies the convolved (field-particle) factor.
  template <class T>
  Field<T> collide(const Field<T>& g, const Field<T>& h) const;

  template <class T>
  SpeciesPair<T> operator_A(const SpeciesPair<T>& g) const;
  template <class T>
  SpeciesPair<T> operator_K(const SpeciesPair<T>& g) const;
  template <class T>
  SpeciesPair<T> linearized_L(const SpeciesPair<T>& g) const;
  template <class T>
  SpeciesPair<T> gamma(const SpeciesPair<T>& g, const SpeciesPair<T>& h) const;

  const RealField& mu() const { return mu_; }
  const RealField& sqrt_mu() const { return sqrt_mu_; }

private:
  // (1/sqrt(mu)) div(sqrt(mu) W), two discretizations of the same thing:
  //  - weighted: flux divergence of sqrt(mu) W divided back; the mass moment
  //    telescopes to zero exactly, but the Gaussian factor is unresolved in
  //    the far corners, so per-node accuracy degrades there. Used by gamma,
  //    where exact mass (charge neutrality) matters.
  //  - smooth: div W - (v/2).W with the analytic drift; uniformly accurate,
  //    mass exact only to O(h^2). Used by A, K, L.
  template <class T>
  Field<T> conjugated_divergence(std::array<Field<T>, 3>& w) const;
  template <class T>
  Field<T> conjugated_divergence_smooth(const std::array<Field<T>, 3>& w) const;

  template <class T>
  void check_output(const Field<T>& f, const char* what) const;

  const VelocityGrid* grid_;
  KernelTable table_;
  ConvolutionEngine engine_;
  double overflow_cap_;
  RealField mu_, sqrt_mu_;
  std::array<RealField, 6> phi_mu_;      // Phi_ij * mu
  std::array<RealField, 3> phi_gradmu_;  // (Phi * grad mu)_i = -sum_j Phi_ij * (v_j mu)
};

}  // namespace vpl
