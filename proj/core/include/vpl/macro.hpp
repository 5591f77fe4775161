#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

#include "vpl/velocity_ops.hpp"

namespace vpl {

/// Macroscopic coefficients of one spatial site / one Fourier mode:
/// P f_pm = (a_pm + b.v + c(|v|^2 - 3)) sqrt(mu).
template <class T>
struct MacroCoeffs {
  T a_plus{}, a_minus{};
  std::array<T, 3> b{};
  T c{};
};

/// High-order moments Theta_ij(f) = <(v_i v_j - 1) sqrt(mu), f> (stored as
/// {11,22,33,12,13,23}) and Lambda_i(f) = (1/10)<(|v|^2-5) v_i sqrt(mu), f>,
/// per species.
template <class T>
struct HighMoments {
  std::array<T, 6> theta_plus{}, theta_minus{};
  std::array<T, 3> lambda_plus{}, lambda_minus{};

  std::array<T, 6> theta_sum() const {
    std::array<T, 6> s{};
    for (int c = 0; c < 6; ++c) s[c] = theta_plus[c] + theta_minus[c];
    return s;
  }
  std::array<T, 3> lambda_sum() const {
    std::array<T, 3> s{};
    for (int c = 0; c < 3; ++c) s[c] = lambda_plus[c] + lambda_minus[c];
    return s;
  }
};

/// Orthogonal projection onto the six collision invariants. The expansion
/// coefficients solve the 6x6 Gram system of the discrete inner products,
/// so idempotence and <psi, {I-P}f> = 0 hold to roundoff on any grid; the
/// textbook coefficient formulas are exposed separately as raw_moments.
class Projector {
public:
  explicit Projector(const VelocityGrid& g);

  const VelocityGrid& grid() const { return *grid_; }
  const RealPair& basis(int i) const { return basis_[i]; }

  template <class T>
  MacroCoeffs<T> coefficients(const SpeciesPair<T>& f) const;
  template <class T>
  MacroCoeffs<T> raw_moments(const SpeciesPair<T>& f) const;
  template <class T>
  SpeciesPair<T> reconstruct(const MacroCoeffs<T>& c) const;
  template <class T>
  SpeciesPair<T> project(const SpeciesPair<T>& f) const;
  template <class T>
  SpeciesPair<T> micro_part(const SpeciesPair<T>& f) const;

  template <class T>
  HighMoments<T> high_moments(const SpeciesPair<T>& f) const;

  /// <psi, f> against a cached moment field; damp multiplies the integrand
  /// by <v>^-4 (tail-contamination diagnostic).
  template <class T>
  T bracket(const RealField& psi, const Field<T>& f, bool damp = false) const;

  const RealField& sqrt_mu() const { return sqrt_mu_; }
  const RealField& v_sqrt_mu(int i) const { return v_sqrt_mu_[i]; }
  const RealField& vv_sqrt_mu(int sym) const { return vv_sqrt_mu_[sym]; }

private:
  const VelocityGrid* grid_;
  RealField sqrt_mu_;
  std::array<RealField, 3> v_sqrt_mu_;    // v_i sqrt(mu)
  std::array<RealField, 6> vv_sqrt_mu_;   // v_i v_j sqrt(mu), sym order
  RealField vv3_sqrt_mu_;                 // (|v|^2-3) sqrt(mu)
  std::array<RealField, 3> lam_sqrt_mu_;  // (|v|^2-5) v_i sqrt(mu)
  std::array<RealPair, 6> basis_;
  Eigen::LDLT<Eigen::Matrix<double, 6, 6>> gram_;

  template <class T>
  friend struct MomentBrackets;
};

/// One time sample of a single Fourier mode for the balance-law checks.
struct ModeMomentSample {
  double t = 0.0;
  ComplexPair f;
  ComplexPair g;     // source, zero pair when absent
  cplx phi_hat{};    // slaved potential
};

struct MomentResidualRow {
  std::string equation;
  double time;
  double residual;         // |LHS - RHS|
  double residual_damped;  // same with <v>^-4 damped brackets
};

/// Residuals of the macroscopic balance laws and high-moment equations along
/// one mode trajectory (uniform time grid, centered time differences).
/// apply_L must be the same linearized operator that produced the data.
std::vector<MomentResidualRow> moment_residuals(
    const std::vector<ModeMomentSample>& traj, const Vec3& k,
    const std::function<ComplexPair(const ComplexPair&)>& apply_L,
    const Projector& proj);

/// |<sqrt(mu), g_+ - g_->| per sample: microscopic sources must satisfy this
/// neutrality compatibility.
std::vector<double> compatibility_defect(const std::vector<ModeMomentSample>& traj,
                                         const Projector& proj);

}  // namespace vpl
