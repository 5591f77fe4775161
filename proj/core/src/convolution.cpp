#include "vpl/convolution.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace vpl {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct ConvolutionEngine::FftPlans {
  int n = 0;       // grid nodes per axis
  int m = 0;       // padded size per axis, 2n
  std::size_t mm = 0;
  fftw_plan fwd = nullptr, bwd = nullptr;
  fftw_complex* buf = nullptr;
  std::vector<std::vector<cplx>> kernel_hat;  // 6 components

  explicit FftPlans(const KernelTable& table) {
    n = table.grid().n_per_axis();
    m = 2 * n;
    mm = static_cast<std::size_t>(m) * m * m;
    buf = fftw_alloc_complex(mm);
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fwd = fftw_plan_dft_3d(m, m, m, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_3d(m, m, m, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    kernel_hat.resize(6);
    for (int c = 0; c < 6; ++c) {
      std::memset(buf, 0, sizeof(fftw_complex) * mm);
      for (int dx = -(n - 1); dx <= n - 1; ++dx)
        for (int dy = -(n - 1); dy <= n - 1; ++dy)
          for (int dz = -(n - 1); dz <= n - 1; ++dz) {
            const std::size_t idx = wrap(dx) * m * m + wrap(dy) * m + wrap(dz);
            buf[idx][0] = table.component(c, dx, dy, dz);
          }
      fftw_execute(fwd);
      kernel_hat[c].resize(mm);
      for (std::size_t i = 0; i < mm; ++i)
        kernel_hat[c][i] = cplx(buf[i][0], buf[i][1]);
    }
  }

  ~FftPlans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buf);
  }

  std::size_t wrap(int d) const { return d >= 0 ? d : d + m; }

  template <class T>
  std::vector<cplx> forward_operand(const Field<T>& x) const {
    std::memset(buf, 0, sizeof(fftw_complex) * mm);
    const int nn = n;
    for (int ix = 0; ix < nn; ++ix)
      for (int iy = 0; iy < nn; ++iy)
        for (int iz = 0; iz < nn; ++iz) {
          const std::size_t src = (static_cast<std::size_t>(ix) * nn + iy) * nn + iz;
          const std::size_t dst = (static_cast<std::size_t>(ix) * m + iy) * m + iz;
          const cplx v(x[src]);
          buf[dst][0] = v.real();
          buf[dst][1] = v.imag();
        }
    fftw_execute(fwd);
    std::vector<cplx> out(mm);
    for (std::size_t i = 0; i < mm; ++i) out[i] = cplx(buf[i][0], buf[i][1]);
    return out;
  }

  // Inverse-transform `hat` and place the physical n^3 block into `out`,
  // scaled by `scale` (quadrature weight over FFT normalization).
  template <class T>
  void inverse_extract(const std::vector<cplx>& hat, double scale,
                       Field<T>& out) const {
    for (std::size_t i = 0; i < mm; ++i) {
      buf[i][0] = hat[i].real();
      buf[i][1] = hat[i].imag();
    }
    fftw_execute(bwd);
    const int nn = n;
    for (int ix = 0; ix < nn; ++ix)
      for (int iy = 0; iy < nn; ++iy)
        for (int iz = 0; iz < nn; ++iz) {
          const std::size_t dst = (static_cast<std::size_t>(ix) * nn + iy) * nn + iz;
          const std::size_t src = (static_cast<std::size_t>(ix) * m + iy) * m + iz;
          if constexpr (std::is_same_v<T, cplx>)
            out[dst] = cplx(buf[src][0], buf[src][1]) * scale;
          else
            out[dst] = buf[src][0] * scale;
        }
  }
};

ConvolutionEngine::ConvolutionEngine(const KernelTable& table, bool use_fft)
    : table_(&table), use_fft_(use_fft) {
  if (use_fft_) fft_ = std::make_unique<FftPlans>(table);
}

ConvolutionEngine::~ConvolutionEngine() = default;

template <class T>
std::array<Field<T>, 6> ConvolutionEngine::convolve_all_direct(
    const Field<T>& x) const {
  const VelocityGrid& g = grid();
  const int n = g.n_per_axis();
  const double qw = g.weight();
  std::array<Field<T>, 6> out{Field<T>(g), Field<T>(g), Field<T>(g),
                              Field<T>(g), Field<T>(g), Field<T>(g)};
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        std::array<T, 6> acc{};
        for (int jx = 0; jx < n; ++jx)
          for (int jy = 0; jy < n; ++jy)
            for (int jz = 0; jz < n; ++jz) {
              const T xv = x[g.index(jx, jy, jz)];
              const Sym3& k = table_->at(ix - jx, iy - jy, iz - jz);
              for (int c = 0; c < 6; ++c) acc[c] += T(k[c]) * xv;
            }
        const std::size_t m = g.index(ix, iy, iz);
        for (int c = 0; c < 6; ++c) out[c][m] = acc[c] * qw;
      }
  return out;
}

template <class T>
std::array<Field<T>, 6> ConvolutionEngine::convolve_all(const Field<T>& x) const {
  if (!use_fft_) return convolve_all_direct(x);
  const VelocityGrid& g = grid();
  const double scale = g.weight() / static_cast<double>(fft_->mm);
  const auto xhat = fft_->forward_operand(x);
  std::array<Field<T>, 6> out{Field<T>(g), Field<T>(g), Field<T>(g),
                              Field<T>(g), Field<T>(g), Field<T>(g)};
  std::vector<cplx> prod(fft_->mm);
  for (int c = 0; c < 6; ++c) {
    const auto& khat = fft_->kernel_hat[c];
    for (std::size_t i = 0; i < fft_->mm; ++i) prod[i] = khat[i] * xhat[i];
    fft_->inverse_extract(prod, scale, out[c]);
  }
  return out;
}

template std::array<RealField, 6> ConvolutionEngine::convolve_all(
    const RealField&) const;
template std::array<ComplexField, 6> ConvolutionEngine::convolve_all(
    const ComplexField&) const;

namespace {
// Symmetric component index for the (i,j) kernel entry.
constexpr int kSymIndex[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
}  // namespace

template <class T>
std::array<Field<T>, 3> ConvolutionEngine::contract_direct(
    const std::array<Field<T>, 3>& x) const {
  const VelocityGrid& g = grid();
  const int n = g.n_per_axis();
  const double qw = g.weight();
  std::array<Field<T>, 3> out{Field<T>(g), Field<T>(g), Field<T>(g)};
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        std::array<T, 3> acc{};
        for (int jx = 0; jx < n; ++jx)
          for (int jy = 0; jy < n; ++jy)
            for (int jz = 0; jz < n; ++jz) {
              const std::size_t m = g.index(jx, jy, jz);
              const Sym3& k = table_->at(ix - jx, iy - jy, iz - jz);
              for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                  acc[i] += T(k[kSymIndex[i][j]]) * x[j][m];
            }
        const std::size_t m = g.index(ix, iy, iz);
        for (int i = 0; i < 3; ++i) out[i][m] = acc[i] * qw;
      }
  return out;
}

template <class T>
std::array<Field<T>, 3> ConvolutionEngine::contract(
    const std::array<Field<T>, 3>& x) const {
  if (!use_fft_) return contract_direct(x);
  const VelocityGrid& g = grid();
  const double scale = g.weight() / static_cast<double>(fft_->mm);
  std::array<std::vector<cplx>, 3> xhat;
  for (int j = 0; j < 3; ++j) xhat[j] = fft_->forward_operand(x[j]);
  std::array<Field<T>, 3> out{Field<T>(g), Field<T>(g), Field<T>(g)};
  std::vector<cplx> prod(fft_->mm);
  for (int i = 0; i < 3; ++i) {
    std::fill(prod.begin(), prod.end(), cplx{});
    for (int j = 0; j < 3; ++j) {
      const auto& khat = fft_->kernel_hat[kSymIndex[i][j]];
      for (std::size_t m = 0; m < fft_->mm; ++m) prod[m] += khat[m] * xhat[j][m];
    }
    fft_->inverse_extract(prod, scale, out[i]);
  }
  return out;
}

template std::array<RealField, 3> ConvolutionEngine::contract(
    const std::array<RealField, 3>&) const;
template std::array<ComplexField, 3> ConvolutionEngine::contract(
    const std::array<ComplexField, 3>&) const;

}  // namespace vpl
