#pragma once

#include <stdexcept>

#include "vpl/grid.hpp"

namespace vpl {

/// Potential and field of one Fourier mode, slaved to the charge density:
/// |k|^2 phi_hat = rho_hat, E_hat = -i k phi_hat.
struct FieldState {
  cplx phi_hat{};
  std::array<cplx, 3> e_hat{};
  Vec3 k{};
};

/// Solve the per-mode Poisson equation. The k = 0 mode carries no field; its
/// charge must vanish (neutrality) within tol.
inline FieldState solve_poisson(cplx rho_hat, const Vec3& k,
                                double neutrality_tol = 1e-10) {
  FieldState out;
  out.k = k;
  const double k2 = dot(k, k);
  if (k2 == 0.0) {
    if (std::abs(rho_hat) > neutrality_tol)
      throw std::domain_error("solve_poisson: nonzero charge on the k=0 mode");
    return out;
  }
  out.phi_hat = rho_hat / k2;
  const cplx mi(0.0, -1.0);
  for (int c = 0; c < 3; ++c) out.e_hat[c] = mi * k[c] * out.phi_hat;
  return out;
}

/// d/dt phi_hat from the continuity equation: -i (k . j_hat) / |k|^2.
inline cplx phi_time_derivative(const std::array<cplx, 3>& j_hat, const Vec3& k) {
  const double k2 = dot(k, k);
  if (k2 == 0.0)
    throw std::domain_error("phi_time_derivative: k = 0 rejected");
  const cplx kj = k[0] * j_hat[0] + k[1] * j_hat[1] + k[2] * j_hat[2];
  return cplx(0.0, -1.0) * kj / k2;
}

}  // namespace vpl
