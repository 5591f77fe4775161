#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vpl {

using Vec3 = std::array<double, 3>;
using cplx = std::complex<double>;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Truncated uniform velocity lattice, cell-centered so no node sits at v=0.
/// Quadrature is the product midpoint rule with uniform weight h^3 per node.
class VelocityGrid {
public:
  VelocityGrid(double v_max, int n_per_axis, double tol_mass = 1e-6)
      : v_max_(v_max), n_(n_per_axis), h_(2.0 * v_max / n_per_axis),
        tol_mass_(tol_mass) {
    if (v_max <= 0.0) throw std::invalid_argument("v_max must be positive");
    if (n_per_axis < 8 || n_per_axis % 2 != 0)
      throw std::invalid_argument("n_per_axis must be even and >= 8");
  }

  double v_max() const { return v_max_; }
  int n_per_axis() const { return n_; }
  double spacing() const { return h_; }
  double tol_mass() const { return tol_mass_; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_) * n_ * n_;
  }
  /// Scalar quadrature weight, identical for every node.
  double weight() const { return h_ * h_ * h_; }

  double coord(int i) const { return -v_max_ + (i + 0.5) * h_; }

  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * n_ + iy) * n_ + iz;
  }
  Vec3 node(std::size_t idx) const {
    const int iz = static_cast<int>(idx % n_);
    const int iy = static_cast<int>((idx / n_) % n_);
    const int ix = static_cast<int>(idx / (static_cast<std::size_t>(n_) * n_));
    return {coord(ix), coord(iy), coord(iz)};
  }

  bool operator==(const VelocityGrid& o) const {
    return v_max_ == o.v_max_ && n_ == o.n_;
  }

private:
  double v_max_;
  int n_;
  double h_;
  double tol_mass_;
};

/// Velocity weight w_ell = <v>^ell, or w(alpha,beta) = <v>^{2(l-|a|-|b|)}.
struct WeightSpec {
  double ell = 0.0;

  static WeightSpec power(double ell) { return WeightSpec{ell}; }
  /// w(alpha,beta); requires l >= |alpha| + |beta| so the weight stays >= 1.
  static WeightSpec alpha_beta(double l, int abs_alpha, int abs_beta) {
    if (l < abs_alpha + abs_beta)
      throw std::invalid_argument("weight exponent requires l >= |alpha|+|beta|");
    return WeightSpec{2.0 * (l - abs_alpha - abs_beta)};
  }

  double operator()(const Vec3& v) const {
    return std::pow(1.0 + dot(v, v), 0.5 * ell);
  }
};

/// Scalar field sampled on a VelocityGrid. T is double or complex<double>.
template <class T>
struct Field {
  const VelocityGrid* grid = nullptr;
  std::vector<T> values;

  Field() = default;
  explicit Field(const VelocityGrid& g) : grid(&g), values(g.size(), T{}) {}

  std::size_t size() const { return values.size(); }
  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }

  Field& operator+=(const Field& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  Field& operator*=(T s) {
    for (auto& x : values) x *= s;
    return *this;
  }
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

/// Two-species bundle g = [g_plus, g_minus] on one grid.
template <class T>
struct SpeciesPair {
  Field<T> plus, minus;

  SpeciesPair() = default;
  explicit SpeciesPair(const VelocityGrid& g) : plus(g), minus(g) {}

  const VelocityGrid& grid() const { return *plus.grid; }
  Field<T>& species(int s) { return s == 0 ? plus : minus; }
  const Field<T>& species(int s) const { return s == 0 ? plus : minus; }

  SpeciesPair& operator+=(const SpeciesPair& o) {
    plus += o.plus;
    minus += o.minus;
    return *this;
  }
  SpeciesPair& operator-=(const SpeciesPair& o) {
    plus -= o.plus;
    minus -= o.minus;
    return *this;
  }
  SpeciesPair& operator*=(T s) {
    plus *= s;
    minus *= s;
    return *this;
  }
};

using RealPair = SpeciesPair<double>;
using ComplexPair = SpeciesPair<cplx>;

}  // namespace vpl
