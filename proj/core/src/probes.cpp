#include "vpl/probes.hpp"

#include <cmath>

#include "vpl/quadrature.hpp"
#include "vpl/rng.hpp"

namespace vpl {

void IntegralCase::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("integral case: p in (0,1]");
  if (!(lambda > 0.0)) throw std::invalid_argument("integral case: lambda > 0");
  if (mu < 0.0) throw std::invalid_argument("integral case: mu >= 0");
}

std::vector<double> IntegralCase::default_t_grid(double t_min, double t_max,
                                                 int count) {
  std::vector<double> t(count);
  const double r = std::log(t_max / t_min) / (count - 1);
  for (int i = 0; i < count; ++i) t[i] = t_min * std::exp(i * r);
  return t;
}

std::vector<IntegralPoint> appendix_integral(const IntegralCase& c,
                                             IntegralVariant variant) {
  c.validate();
  std::vector<IntegralPoint> out;
  out.reserve(c.t_grid.size());
  for (const double t : c.t_grid) {
    const double tp = std::pow(t, c.p);
    auto integrand = [&](double s) {
      const double sp = std::pow(s, c.p);
      double val = std::exp(-c.lambda * (tp - sp)) * std::pow(1.0 + s, -c.mu);
      if (variant == IntegralVariant::A2) val *= std::pow(s, c.p - 1.0);
      return val;
    };
    // The s^{p-1} factor is integrable at 0; substitute s = u^{1/p} there.
    double value;
    if (variant == IntegralVariant::A2 && c.p < 1.0) {
      auto sub = [&](double u) {
        // s = u^{1/p}, ds = (1/p) u^{1/p-1} du, s^{p-1} ds = du / p
        const double s = std::pow(u, 1.0 / c.p);
        return std::exp(-c.lambda * (tp - u)) * std::pow(1.0 + s, -c.mu) / c.p;
      };
      value = adaptive_gauss(sub, 0.0, tp);
    } else {
      value = adaptive_gauss(integrand, 0.0, t);
    }
    IntegralPoint pt;
    pt.t = t;
    pt.value = value;
    if (variant == IntegralVariant::A1) {
      pt.upper_envelope = std::pow(1.0 + t, 1.0 - c.p - c.mu);
      pt.lower_bound =
          t >= 1.0
              ? std::pow(4.0, c.p - 1.0) / (c.lambda * c.p) *
                    std::pow(1.0 + t, 1.0 - c.p - c.mu) *
                    (1.0 - std::exp(-c.lambda * tp * (1.0 - std::pow(2.0, -c.p))))
              : 0.0;
    } else {
      pt.upper_envelope = std::pow(1.0 + t, -c.mu);
      pt.lower_bound = 0.0;
    }
    out.push_back(pt);
  }
  return out;
}

DecayFit fit_decay_exponent(const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 8)
    throw std::invalid_argument("fit_decay_exponent: need >= 8 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(series.size());
  for (const auto& [t, v] : series) {
    if (v <= 0.0)
      throw std::invalid_argument("fit_decay_exponent: nonpositive value");
    const double x = std::log1p(t), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  DecayFit fit;
  fit.points = n;
  fit.slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (const auto& [t, v] : series) {
    const double r = std::log(v) - fit.slope * std::log1p(t) - intercept;
    ss += r * r;
  }
  if (n > 2) fit.stderr_ = std::sqrt(ss / (n - 2) / (sxx - sx * sx / n));
  return fit;
}

DecayFit fit_decay_exponent(const std::vector<std::pair<double, double>>& series,
                            double t_min, double t_max) {
  std::vector<std::pair<double, double>> window;
  for (const auto& p : series)
    if (p.first >= t_min && p.first <= t_max) window.push_back(p);
  return fit_decay_exponent(window);
}

namespace {

// sum over beta1 in [0, beta] (component-wise) of |d_beta1 g1|_{2,-b} with
// multiplicity matching the nested sum over beta_bar; |beta| <= 1 keeps this
// to at most two terms.
double g1_norm_sum(const RealPair& g1, int beta_axis, double b) {
  const WeightSpec w = WeightSpec::power(-b);
  double acc = weighted_lp_norm(g1.plus, 2, w) + weighted_lp_norm(g1.minus, 2, w);
  if (beta_axis >= 0) {
    const auto gp = v_gradient(g1.plus);
    const auto gm = v_gradient(g1.minus);
    acc += weighted_lp_norm(gp[beta_axis], 2, w) +
           weighted_lp_norm(gm[beta_axis], 2, w);
  }
  return acc;
}

}  // namespace

ProbeStats trilinear_probe(const CollisionOperator& op, const Projector& proj,
                           int samples, std::uint64_t seed, double ell, double b) {
  (void)proj;
  if (b < 4.0) throw std::invalid_argument("trilinear_probe: b >= 4 required");
  const VelocityGrid& grid = op.grid();
  Rng rng(seed);
  ProbeStats stats;
  stats.seed = seed;
  const WeightSpec wl = WeightSpec::power(ell);
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) {
    const RealPair g1 = random_smooth_pair(grid, rng);
    const RealPair g2 = random_smooth_pair(grid, rng);
    const RealPair g3 = random_smooth_pair(grid, rng);
    // alternate between beta = 0 and beta = e1
    const int beta_axis = (s % 2 == 0) ? -1 : 0;

    const RealPair gam = op.gamma(g1, g2);
    RealField lhs_p = gam.plus, lhs_m = gam.minus;
    RealField g3p = g3.plus, g3m = g3.minus;
    if (beta_axis >= 0) {
      lhs_p = v_gradient(gam.plus)[beta_axis];
      lhs_m = v_gradient(gam.minus)[beta_axis];
      g3p = v_gradient(g3.plus)[beta_axis];
      g3m = v_gradient(g3.minus)[beta_axis];
    }
    double lhs = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
      const Vec3 v = grid.node(m);
      const double w2l = std::pow(1.0 + dot(v, v), ell);  // w_{2 ell}
      lhs += w2l * (lhs_p[m] * g3p[m] + lhs_m[m] * g3m[m]);
    }
    lhs = std::abs(lhs) * grid.weight();

    double rhs = 0.0;
    // beta1 = 0 term: |g1 terms| * |d_beta g2|_{sigma,l} * |d_beta g3|_{sigma,l}
    // beta1 = beta term: gradient moves onto g1.
    const double g3_sig = (beta_axis < 0)
                              ? sigma_norm(g3, wl)
                              : sigma_norm(g3p, wl) + sigma_norm(g3m, wl);
    {
      RealField g2p = g2.plus, g2m = g2.minus;
      if (beta_axis >= 0) {
        g2p = v_gradient(g2.plus)[beta_axis];
        g2m = v_gradient(g2.minus)[beta_axis];
      }
      rhs += g1_norm_sum(g1, -1, b) * (sigma_norm(g2p, wl) + sigma_norm(g2m, wl)) * g3_sig;
    }
    if (beta_axis >= 0) {
      rhs += g1_norm_sum(g1, beta_axis, b) * sigma_norm(g2, wl) * g3_sig;
    }
    if (rhs == 0.0) {
      ++stats.skipped;
      continue;
    }
    const double ratio = lhs / rhs;
    stats.max_ratio = std::max(stats.max_ratio, ratio);
    stats.min_ratio = std::min(stats.min_ratio, ratio);
    sum += ratio;
    ++stats.samples;
  }
  if (stats.samples > 0) stats.mean_ratio = sum / stats.samples;
  return stats;
}

ProbeStats lbound_probe(const VelocityGrid& grid, int samples, std::uint64_t seed,
                        double ell) {
  Rng rng(seed);
  ProbeStats stats;
  stats.seed = seed;
  const WeightSpec wl = WeightSpec::power(ell);
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) {
    const RealField g = random_smooth_field(grid, rng);
    const auto grad = v_gradient(g);
    const auto pv = pv_project(grad);
    double rhs = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
      const Vec3 v = grid.node(m);
      const double r1 = 1.0 + norm(v);
      const double w2 = std::pow(1.0 + dot(v, v), ell);
      double ppart = 0.0, qpart = 0.0;
      for (int c = 0; c < 3; ++c) {
        ppart += pv[c][m] * pv[c][m];
        const double q = grad[c][m] - pv[c][m];
        qpart += q * q;
      }
      rhs += w2 * (ppart / (r1 * r1 * r1) + qpart / r1 + g[m] * g[m] / r1);
    }
    rhs *= grid.weight();
    const double sig = sigma_norm(g, wl);
    const double lhs = sig * sig;
    if (rhs == 0.0) {
      ++stats.skipped;
      continue;
    }
    const double ratio = lhs / rhs;
    stats.max_ratio = std::max(stats.max_ratio, ratio);
    stats.min_ratio = std::min(stats.min_ratio, ratio);
    sum += ratio;
    ++stats.samples;
  }
  if (stats.samples > 0) stats.mean_ratio = sum / stats.samples;
  return stats;
}

}  // namespace vpl
