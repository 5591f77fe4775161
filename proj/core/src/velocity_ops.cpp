#include "vpl/velocity_ops.hpp"

#include <cmath>

namespace vpl {

namespace {
constexpr double kMaxwellPrefactor = 0.06349363593424097;  // (2pi)^{-3/2}
}

RealField maxwellian(const VelocityGrid& grid) {
  RealField f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 v = grid.node(i);
    f[i] = kMaxwellPrefactor * std::exp(-0.5 * dot(v, v));
  }
  return f;
}

RealField sqrt_maxwellian(const VelocityGrid& grid) {
  RealField f(grid);
  const double pref = std::sqrt(kMaxwellPrefactor);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 v = grid.node(i);
    f[i] = pref * std::exp(-0.25 * dot(v, v));
  }
  return f;
}

double maxwellian_mass_defect(const VelocityGrid& grid) {
  const RealField mu = maxwellian(grid);
  double mass = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) mass += mu[i];
  return mass * grid.weight() - 1.0;
}

template <class T>
double weighted_lp_norm(const Field<T>& f, int p, const WeightSpec& w) {
  if (p != 1 && p != 2) throw std::invalid_argument("p must be 1 or 2");
  const VelocityGrid& g = *f.grid;
  double acc = 0.0;
  if (p == 1) {
    for (std::size_t i = 0; i < f.size(); ++i)
      acc += w(g.node(i)) * std::abs(f[i]);
    return acc * g.weight();
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double wi = w(g.node(i));
    acc += wi * wi * std::norm(cplx(f[i]));
  }
  return std::sqrt(acc * g.weight());
}

template double weighted_lp_norm(const RealField&, int, const WeightSpec&);
template double weighted_lp_norm(const ComplexField&, int, const WeightSpec&);

template <class T>
T inner(const Field<T>& f, const Field<T>& g) {
  T acc{};
  if constexpr (std::is_same_v<T, cplx>) {
    for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::conj(g[i]);
  } else {
    for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * g[i];
  }
  return acc * T(f.grid->weight());
}

template double inner(const RealField&, const RealField&);
template cplx inner(const ComplexField&, const ComplexField&);

namespace {

// d/dx along one axis at fixed other indices; exact on quadratics everywhere.
template <class T>
void axis_derivative(const VelocityGrid& g, const std::vector<T>& f,
                     int axis, std::vector<T>& out) {
  const int n = g.n_per_axis();
  const double inv2h = 1.0 / (2.0 * g.spacing());
  std::size_t stride[3] = {static_cast<std::size_t>(n) * n,
                           static_cast<std::size_t>(n), 1};
  const std::size_t s = stride[axis];
  // Iterate over all lines along `axis`.
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::size_t base;
      if (axis == 0)
        base = g.index(0, a, b);
      else if (axis == 1)
        base = g.index(a, 0, b);
      else
        base = g.index(a, b, 0);
      out[base] = (T(-3.0) * f[base] + T(4.0) * f[base + s] - f[base + 2 * s]) * inv2h;
      for (int i = 1; i + 1 < n; ++i) {
        const std::size_t m = base + i * s;
        out[m] = (f[m + s] - f[m - s]) * inv2h;
      }
      const std::size_t e = base + (n - 1) * s;
      out[e] = (T(3.0) * f[e] - T(4.0) * f[e - s] + f[e - 2 * s]) * inv2h;
    }
}

}  // namespace

template <class T>
std::array<Field<T>, 3> v_gradient(const Field<T>& f) {
  const VelocityGrid& g = *f.grid;
  std::array<Field<T>, 3> out{Field<T>(g), Field<T>(g), Field<T>(g)};
  for (int axis = 0; axis < 3; ++axis)
    axis_derivative(g, f.values, axis, out[axis].values);
  return out;
}

template std::array<RealField, 3> v_gradient(const RealField&);
template std::array<ComplexField, 3> v_gradient(const ComplexField&);

template <class T>
Field<T> flux_divergence(const std::array<Field<T>, 3>& u) {
  const VelocityGrid& g = *u[0].grid;
  const int n = g.n_per_axis();
  const double invh = 1.0 / g.spacing();
  Field<T> out(g);
  std::size_t stride[3] = {static_cast<std::size_t>(n) * n,
                           static_cast<std::size_t>(n), 1};
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t s = stride[axis];
    const std::vector<T>& f = u[axis].values;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        std::size_t base;
        if (axis == 0)
          base = g.index(0, a, b);
        else if (axis == 1)
          base = g.index(a, 0, b);
        else
          base = g.index(a, b, 0);
        // Face fluxes are averages of adjacent node values; boundary faces
        // carry zero flux so the divergence telescopes to zero exactly.
        T below{};  // flux through the lower face of the current cell
        for (int i = 0; i + 1 < n; ++i) {
          const std::size_t m = base + i * s;
          const T above = (f[m] + f[m + s]) * 0.5;
          out.values[m] += (above - below) * invh;
          below = above;
        }
        out.values[base + (n - 1) * s] += (T{} - below) * invh;
      }
  }
  return out;
}

template RealField flux_divergence(const std::array<RealField, 3>&);
template ComplexField flux_divergence(const std::array<ComplexField, 3>&);

namespace {

template <class T>
std::array<double, 3> sigma_components(const Field<T>& f, const WeightSpec& w) {
  const VelocityGrid& g = *f.grid;
  const auto grad = v_gradient(f);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 v = g.node(i);
    const double r = norm(v);
    const double br = 1.0 + dot(v, v);  // <v>^2
    const double wi = w(v);
    const double w2 = wi * wi;
    const cplx gx(grad[0][i]), gy(grad[1][i]), gz(grad[2][i]);
    const cplx radial = (gx * v[0] + gy * v[1] + gz * v[2]) / r;
    const cplx cx = (gy * v[2] - gz * v[1]) / r;
    const cplx cy = (gz * v[0] - gx * v[2]) / r;
    const cplx cz = (gx * v[1] - gy * v[0]) / r;
    s0 += w2 * std::norm(cplx(f[i])) / br;
    s1 += w2 * std::norm(radial) / (br * br * br);
    s2 += w2 * (std::norm(cx) + std::norm(cy) + std::norm(cz)) / br;
  }
  const double qw = g.weight();
  return {s0 * qw, s1 * qw, s2 * qw};
}

}  // namespace

template <class T>
double sigma_norm(const Field<T>& f, const WeightSpec& w) {
  const auto c = sigma_components(f, w);
  return std::sqrt(c[0]) + std::sqrt(c[1]) + std::sqrt(c[2]);
}

template double sigma_norm(const RealField&, const WeightSpec&);
template double sigma_norm(const ComplexField&, const WeightSpec&);

template <class T>
double sigma_norm_sq_form(const Field<T>& f, const WeightSpec& w) {
  const auto c = sigma_components(f, w);
  return c[0] + c[1] + c[2];
}

template double sigma_norm_sq_form(const RealField&, const WeightSpec&);
template double sigma_norm_sq_form(const ComplexField&, const WeightSpec&);

template <class T>
std::array<Field<T>, 3> pv_project(const std::array<Field<T>, 3>& g) {
  const VelocityGrid& grid = *g[0].grid;
  std::array<Field<T>, 3> out{Field<T>(grid), Field<T>(grid), Field<T>(grid)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 v = grid.node(i);
    const T s = (g[0][i] * v[0] + g[1][i] * v[1] + g[2][i] * v[2]) / dot(v, v);
    out[0][i] = s * v[0];
    out[1][i] = s * v[1];
    out[2][i] = s * v[2];
  }
  return out;
}

template std::array<RealField, 3> pv_project(const std::array<RealField, 3>&);
template std::array<ComplexField, 3> pv_project(const std::array<ComplexField, 3>&);

}  // namespace vpl
