#pragma once

#include "vpl/grid.hpp"

namespace vpl {

/// Normalized Maxwellian (2pi)^{-3/2} exp(-|v|^2/2) sampled node-wise.
RealField maxwellian(const VelocityGrid& grid);
/// Node-wise square root of the Maxwellian.
RealField sqrt_maxwellian(const VelocityGrid& grid);

/// Discrete mass of the Maxwellian; must sit within grid.tol_mass() of 1.
double maxwellian_mass_defect(const VelocityGrid& grid);

/// (sum_j qw * w(v_j)^p * |f_j|^p)^(1/p), p in {1,2}.
template <class T>
double weighted_lp_norm(const Field<T>& f, int p, const WeightSpec& w);

/// Plain L2 norm (weight 1).
template <class T>
double l2_norm(const Field<T>& f) {
  return weighted_lp_norm(f, 2, WeightSpec{0.0});
}

template <class T>
double l2_norm(const SpeciesPair<T>& g) {
  const double a = l2_norm(g.plus), b = l2_norm(g.minus);
  return std::sqrt(a * a + b * b);
}

/// Discrete <f, g> = sum qw f conj(g), real part for complex fields.
template <class T>
T inner(const Field<T>& f, const Field<T>& g);

/// Second-order gradient: central differences inside, one-sided second-order
/// stencils on the first/last node of each axis.
template <class T>
std::array<Field<T>, 3> v_gradient(const Field<T>& f);

/// Flux-form divergence with zero flux through the domain boundary; agrees
/// with central differencing at interior nodes and sums to zero exactly.
template <class T>
Field<T> flux_divergence(const std::array<Field<T>, 3>& u);

/// Anisotropic norm |f|_{sigma,w}: the weighted L2 norms of <v>^{-1/2} f,
/// <v>^{-3/2} (grad f . v/|v|), and <v>^{-1/2} |grad f x v/|v||, summed.
template <class T>
double sigma_norm(const Field<T>& f, const WeightSpec& w = WeightSpec{0.0});

/// Same but with the three component norms squared and summed (a quadratic
/// form equivalent to sigma_norm^2 within a factor of 3).
template <class T>
double sigma_norm_sq_form(const Field<T>& f, const WeightSpec& w = WeightSpec{0.0});

template <class T>
double sigma_norm(const SpeciesPair<T>& g, const WeightSpec& w = WeightSpec{0.0}) {
  return sigma_norm(g.plus, w) + sigma_norm(g.minus, w);
}

/// Node-wise projection of a vector field onto v/|v|.
template <class T>
std::array<Field<T>, 3> pv_project(const std::array<Field<T>, 3>& g);

}  // namespace vpl
