#include "vpl/collision.hpp"

#include <cmath>
#include <stdexcept>

namespace vpl {

CollisionOperator::CollisionOperator(const VelocityGrid& grid, bool use_fft,
                                     double overflow_cap)
    : grid_(&grid), table_(grid), engine_(table_, use_fft),
      overflow_cap_(overflow_cap), mu_(maxwellian(grid)),
      sqrt_mu_(sqrt_maxwellian(grid)) {
  phi_mu_ = engine_.convolve_all(mu_);
  std::array<RealField, 3> vmu{RealField(grid), RealField(grid), RealField(grid)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 v = grid.node(i);
    for (int c = 0; c < 3; ++c) vmu[c][i] = v[c] * mu_[i];
  }
  phi_gradmu_ = engine_.contract(vmu);
  for (int c = 0; c < 3; ++c)
    for (auto& x : phi_gradmu_[c].values) x = -x;
}

namespace {
constexpr int kSym[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
}

template <class T>
Field<T> CollisionOperator::collide(const Field<T>& g, const Field<T>& h) const {
  if (!(*g.grid == *grid_) || !(*h.grid == *grid_))
    throw std::invalid_argument("collide: grid mismatch");
  const auto grad_g = v_gradient(g);
  const auto grad_h = v_gradient(h);
  const auto t = engine_.convolve_all(g);   // Phi_ij * g
  const auto z = engine_.contract(grad_g);  // sum_j Phi_ij * d_j g
  std::array<Field<T>, 3> u{Field<T>(*grid_), Field<T>(*grid_), Field<T>(*grid_)};
  for (std::size_t m = 0; m < grid_->size(); ++m)
    for (int i = 0; i < 3; ++i) {
      T acc = -z[i][m] * h[m];
      for (int j = 0; j < 3; ++j) acc += t[kSym[i][j]][m] * grad_h[j][m];
      u[i][m] = acc;
    }
  return flux_divergence(u);
}

template RealField CollisionOperator::collide(const RealField&, const RealField&) const;
template ComplexField CollisionOperator::collide(const ComplexField&, const ComplexField&) const;

template <class T>
Field<T> CollisionOperator::conjugated_divergence(std::array<Field<T>, 3>& w) const {
  for (int c = 0; c < 3; ++c)
    for (std::size_t m = 0; m < grid_->size(); ++m) w[c][m] *= sqrt_mu_[m];
  Field<T> div = flux_divergence(w);
  for (std::size_t m = 0; m < grid_->size(); ++m) div[m] /= sqrt_mu_[m];
  return div;
}

template <class T>
Field<T> CollisionOperator::conjugated_divergence_smooth(
    const std::array<Field<T>, 3>& w) const {
  Field<T> div = flux_divergence(w);
  for (std::size_t m = 0; m < grid_->size(); ++m) {
    const Vec3 v = grid_->node(m);
    div[m] -= T(0.5) * (T(v[0]) * w[0][m] + T(v[1]) * w[1][m] + T(v[2]) * w[2][m]);
  }
  return div;
}

template <class T>
void CollisionOperator::check_output(const Field<T>& f, const char* what) const {
  for (std::size_t m = 0; m < f.size(); ++m) {
    const double mag = std::abs(cplx(f[m]));
    if (!std::isfinite(mag)) throw std::runtime_error(std::string(what) + ": non-finite value");
    const Vec3 v = grid_->node(m);
    const double br = 1.0 + dot(v, v);
    if (mag * br * br > overflow_cap_)
      throw std::overflow_error(std::string(what) + ": weighted value exceeds cap");
  }
}

template <class T>
SpeciesPair<T> CollisionOperator::operator_A(const SpeciesPair<T>& g) const {
  SpeciesPair<T> out(*grid_);
  for (int s = 0; s < 2; ++s) {
    const Field<T>& gs = g.species(s);
    const auto grad = v_gradient(gs);
    std::array<Field<T>, 3> w{Field<T>(*grid_), Field<T>(*grid_), Field<T>(*grid_)};
    for (std::size_t m = 0; m < grid_->size(); ++m) {
      const Vec3 v = grid_->node(m);
      for (int i = 0; i < 3; ++i) {
        T acc = -phi_gradmu_[i][m] * gs[m];
        for (int j = 0; j < 3; ++j)
          acc += T(phi_mu_[kSym[i][j]][m]) * (grad[j][m] - T(0.5 * v[j]) * gs[m]);
        w[i][m] = acc;
      }
    }
    Field<T> div = conjugated_divergence_smooth(w);
    for (auto& x : div.values) x *= 2.0;
    check_output(div, "operator_A");
    out.species(s) = std::move(div);
  }
  return out;
}

template RealPair CollisionOperator::operator_A(const RealPair&) const;
template ComplexPair CollisionOperator::operator_A(const ComplexPair&) const;

template <class T>
SpeciesPair<T> CollisionOperator::operator_K(const SpeciesPair<T>& g) const {
  // K_pm g depends on g only through s = g_+ + g_-; both species get the
  // same output.
  Field<T> s(*grid_);
  for (std::size_t m = 0; m < grid_->size(); ++m)
    s[m] = g.plus[m] + g.minus[m];
  const auto grad_s = v_gradient(s);
  Field<T> x0(*grid_);
  std::array<Field<T>, 3> xg{Field<T>(*grid_), Field<T>(*grid_), Field<T>(*grid_)};
  for (std::size_t m = 0; m < grid_->size(); ++m) {
    const Vec3 v = grid_->node(m);
    x0[m] = sqrt_mu_[m] * s[m];
    for (int j = 0; j < 3; ++j)
      xg[j][m] = sqrt_mu_[m] * (grad_s[j][m] - T(0.5 * v[j]) * s[m]);
  }
  const auto t = engine_.convolve_all(x0);
  const auto z = engine_.contract(xg);
  std::array<Field<T>, 3> w{Field<T>(*grid_), Field<T>(*grid_), Field<T>(*grid_)};
  for (std::size_t m = 0; m < grid_->size(); ++m) {
    const Vec3 v = grid_->node(m);
    for (int i = 0; i < 3; ++i) {
      T acc = z[i][m];
      for (int j = 0; j < 3; ++j) acc += t[kSym[i][j]][m] * T(v[j]);
      w[i][m] = -sqrt_mu_[m] * acc;
    }
  }
  Field<T> div = conjugated_divergence_smooth(w);
  check_output(div, "operator_K");
  SpeciesPair<T> out(*grid_);
  out.plus = div;
  out.minus = std::move(div);
  return out;
}

template RealPair CollisionOperator::operator_K(const RealPair&) const;
template ComplexPair CollisionOperator::operator_K(const ComplexPair&) const;

template <class T>
SpeciesPair<T> CollisionOperator::linearized_L(const SpeciesPair<T>& g) const {
  SpeciesPair<T> a = operator_A(g);
  const SpeciesPair<T> k = operator_K(g);
  for (std::size_t m = 0; m < grid_->size(); ++m) {
    a.plus[m] = -(a.plus[m] + k.plus[m]);
    a.minus[m] = -(a.minus[m] + k.minus[m]);
  }
  return a;
}

template RealPair CollisionOperator::linearized_L(const RealPair&) const;
template ComplexPair CollisionOperator::linearized_L(const ComplexPair&) const;

template <class T>
SpeciesPair<T> CollisionOperator::gamma(const SpeciesPair<T>& g,
                                        const SpeciesPair<T>& h) const {
  Field<T> s(*grid_);
  for (std::size_t m = 0; m < grid_->size(); ++m)
    s[m] = g.plus[m] + g.minus[m];
  const auto grad_s = v_gradient(s);
  Field<T> x0(*grid_);
  std::array<Field<T>, 3> xg{Field<T>(*grid_), Field<T>(*grid_), Field<T>(*grid_)};
  for (std::size_t m = 0; m < grid_->size(); ++m) {
    const Vec3 v = grid_->node(m);
    x0[m] = sqrt_mu_[m] * s[m];
    for (int j = 0; j < 3; ++j)
      xg[j][m] = sqrt_mu_[m] * (grad_s[j][m] - T(0.5 * v[j]) * s[m]);
  }
  const auto t = engine_.convolve_all(x0);
  const auto z = engine_.contract(xg);

  SpeciesPair<T> out(*grid_);
  for (int sp = 0; sp < 2; ++sp) {
    const Field<T>& hs = h.species(sp);
    const auto grad_h = v_gradient(hs);
    std::array<Field<T>, 3> w{Field<T>(*grid_), Field<T>(*grid_), Field<T>(*grid_)};
    for (std::size_t m = 0; m < grid_->size(); ++m) {
      const Vec3 v = grid_->node(m);
      for (int i = 0; i < 3; ++i) {
        T acc = -z[i][m] * hs[m];
        for (int j = 0; j < 3; ++j)
          acc += t[kSym[i][j]][m] * (grad_h[j][m] - T(0.5 * v[j]) * hs[m]);
        w[i][m] = acc;
      }
    }
    Field<T> div = conjugated_divergence(w);
    check_output(div, "gamma");
    out.species(sp) = std::move(div);
  }
  return out;
}

template RealPair CollisionOperator::gamma(const RealPair&, const RealPair&) const;
template ComplexPair CollisionOperator::gamma(const ComplexPair&, const ComplexPair&) const;

}  // namespace vpl
