#pragma once

#include <cstdint>
#include <vector>

#include "vpl/collision.hpp"
#include "vpl/macro.hpp"

namespace vpl {

/// Parameters of the time integrals int_0^t exp(-lambda(t^p - s^p)) ... ds.
struct IntegralCase {
  double p = 0.5;      // in (0, 1]
  double lambda = 1.0; // > 0
  double mu = 0.0;     // >= 0
  std::vector<double> t_grid;  // log-spaced sample times

  void validate() const;
  static std::vector<double> default_t_grid(double t_min = 0.1, double t_max = 1e4,
                                            int count = 60);
};

enum class IntegralVariant { A1, A2 };  // A2 carries the extra s^{p-1} factor

struct IntegralPoint {
  double t;
  double value;
  double upper_envelope;  // (1+t)^{1-p-mu} resp. (1+t)^{-mu}
  double lower_bound;     // sharp lower envelope, A1 with t >= 1 only
};

/// Adaptive-quadrature values of the integral with the upper-bound envelope
/// and (for A1, t >= 1) the asymptotically sharp lower bound
///   (4^{p-1}/(lambda p)) (1+t)^{1-p-mu} (1 - exp(-lambda t^p (1-2^-p))).
std::vector<IntegralPoint> appendix_integral(const IntegralCase& c,
                                             IntegralVariant variant);

struct DecayFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  int points = 0;
};

/// Least-squares slope of log(value) against log(1+t).
DecayFit fit_decay_exponent(const std::vector<std::pair<double, double>>& series);
DecayFit fit_decay_exponent(const std::vector<std::pair<double, double>>& series,
                            double t_min, double t_max);

struct ProbeStats {
  double max_ratio = 0.0;
  double min_ratio = std::numeric_limits<double>::infinity();
  double mean_ratio = 0.0;
  int samples = 0;
  int skipped = 0;
  std::uint64_t seed = 0;
};

/// Ratio <w_2l d^b Gamma(g1,g2), d^b g3> over the product of the three norms
/// on the estimate's right side, sampled over seeded smooth triples with
/// |beta| <= 1. b >= 4 is required for the negative-weight norm of g1.
ProbeStats trilinear_probe(const CollisionOperator& op, const Projector& proj,
                           int samples, std::uint64_t seed, double ell = 1.0,
                           double b = 6.0);

/// Min of |g|_{sigma,w_l}^2 over the split lower bound
///   |[1+|v|]^{-3/2} P_v dg|^2 + |[1+|v|]^{-1/2} (I-P_v) dg|^2
///   + |[1+|v|]^{-1/2} g|^2   (all weighted by w_l).
ProbeStats lbound_probe(const VelocityGrid& grid, int samples, std::uint64_t seed,
                        double ell = 1.0);

}  // namespace vpl
