#pragma once

#include <memory>

#include "vpl/kernel.hpp"

namespace vpl {

/// Lattice convolutions against the kernel table, quadrature weight folded
/// in: out(v) = qw * sum_{v*} Phi_c(v - v*) x(v*).
///
/// The FFT path zero-pads to (2n)^3, which reproduces the finite lattice sum
/// with no cyclic aliasing; it must (and does, see tests) agree with the
/// direct O(N^2) summation to ~1e-13 relative.
class ConvolutionEngine {
public:
  explicit ConvolutionEngine(const KernelTable& table, bool use_fft = true);
  ~ConvolutionEngine();

  ConvolutionEngine(const ConvolutionEngine&) = delete;
  ConvolutionEngine& operator=(const ConvolutionEngine&) = delete;

  const VelocityGrid& grid() const { return table_->grid(); }
  bool fft_enabled() const { return use_fft_; }

  /// All six kernel components convolved with one operand.
  template <class T>
  std::array<Field<T>, 6> convolve_all(const Field<T>& x) const;

  /// Z_i = sum_j Phi_ij * x_j.
  template <class T>
  std::array<Field<T>, 3> contract(const std::array<Field<T>, 3>& x) const;

private:
  struct FftPlans;

  template <class T>
  std::array<Field<T>, 6> convolve_all_direct(const Field<T>& x) const;
  template <class T>
  std::array<Field<T>, 3> contract_direct(const std::array<Field<T>, 3>& x) const;

  const KernelTable* table_;
  bool use_fft_;
  std::unique_ptr<FftPlans> fft_;
};

}  // namespace vpl
