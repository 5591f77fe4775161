#include "vpl/dense_collision.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>

#include "vpl/macro.hpp"
#include "vpl/rng.hpp"

namespace vpl {

namespace {

constexpr int kSym[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
constexpr std::uint64_t kCacheMagic = 0x56504c44454e5331ull;  // "VPLDENS1"

struct StencilEntry {
  std::int32_t node;
  double coef;
};

// Second-order d/dv stencils per node and axis, 3 entries each.
std::vector<std::array<std::array<StencilEntry, 3>, 3>> build_stencils(
    const VelocityGrid& g) {
  const int n = g.n_per_axis();
  const double inv2h = 1.0 / (2.0 * g.spacing());
  std::vector<std::array<std::array<StencilEntry, 3>, 3>> st(g.size());
  const std::int64_t stride[3] = {static_cast<std::int64_t>(n) * n, n, 1};
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const std::size_t m = g.index(ix, iy, iz);
        const int pos[3] = {ix, iy, iz};
        for (int axis = 0; axis < 3; ++axis) {
          const std::int64_t s = stride[axis];
          const std::int64_t mm = static_cast<std::int64_t>(m);
          auto& e = st[m][axis];
          if (pos[axis] == 0) {
            e = {{{static_cast<std::int32_t>(mm), -3.0 * inv2h},
                  {static_cast<std::int32_t>(mm + s), 4.0 * inv2h},
                  {static_cast<std::int32_t>(mm + 2 * s), -inv2h}}};
          } else if (pos[axis] == n - 1) {
            e = {{{static_cast<std::int32_t>(mm), 3.0 * inv2h},
                  {static_cast<std::int32_t>(mm - s), -4.0 * inv2h},
                  {static_cast<std::int32_t>(mm - 2 * s), inv2h}}};
          } else {
            e = {{{static_cast<std::int32_t>(mm - s), -inv2h},
                  {static_cast<std::int32_t>(mm), 0.0},
                  {static_cast<std::int32_t>(mm + s), inv2h}}};
          }
        }
      }
  return st;
}

}  // namespace

Eigen::MatrixXd DenseCollision::assemble_sector(const VelocityGrid& grid,
                                                const KernelTable& table,
                                                bool sum_sector) {
  const int n = grid.n_per_axis();
  const std::size_t N = grid.size();
  const double qw = grid.weight();
  const RealField mu = maxwellian(grid);
  const RealField rt = sqrt_maxwellian(grid);
  const auto st = build_stencils(grid);

  // The convolved coefficient field must use the same kernel table and
  // direct summation as the pair part so the two cancel exactly on the
  // collision invariants.
  ConvolutionEngine direct(table, /*use_fft=*/false);
  const auto phi_mu = direct.convolve_all(mu);

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);

  // Stencil entries with the 1/sqrt(mu) conjugation folded in.
  std::vector<std::array<std::array<StencilEntry, 3>, 3>> stc = st;
  for (std::size_t a = 0; a < N; ++a)
    for (int axis = 0; axis < 3; ++axis)
      for (auto& e : stc[a][axis]) e.coef /= rt[e.node];

  // Local part: sum_v qw mu(v) Du^T (Phi*mu)(v) Du.
  for (std::size_t v = 0; v < N; ++v) {
    const double wv = qw * mu[v];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double aij = wv * phi_mu[kSym[i][j]][v];
        for (const auto& ea : stc[v][i])
          for (const auto& eb : stc[v][j])
            m(ea.node, eb.node) += aij * ea.coef * eb.coef;
      }
  }

  // Pair part, sum sector only: -2 sum_{v,v*} qw^2 mu mu* Du(v)^T Phi(v-v*) Du(v*).
  if (sum_sector) {
    for (std::size_t v = 0; v < N; ++v) {
      const int vx = static_cast<int>(v / (static_cast<std::size_t>(n) * n));
      const int vy = static_cast<int>((v / n) % n);
      const int vz = static_cast<int>(v % n);
      const double wv = qw * mu[v];
      for (int ux = 0; ux < n; ++ux) {
        const int dx = vx - ux;
        for (int uy = 0; uy < n; ++uy) {
          const int dy = vy - uy;
          for (int uz = 0; uz < n; ++uz) {
            const std::size_t u = grid.index(ux, uy, uz);
            const Sym3& k = table.at(dx, dy, vz - uz);
            const double w2 = -2.0 * wv * qw * mu[u];
            for (int i = 0; i < 3; ++i)
              for (int j = 0; j < 3; ++j) {
                const double c = w2 * k[kSym[i][j]];
                if (c == 0.0) continue;
                for (const auto& ea : stc[v][i])
                  for (const auto& eb : stc[u][j])
                    m(ea.node, eb.node) += c * ea.coef * eb.coef;
              }
          }
        }
      }
    }
  }

  m /= qw;  // operator matrix in the quadrature inner product
  return m;
}

namespace {

std::string cache_path(const std::string& dir, const VelocityGrid& g, int sector) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "dense_L_n%d_vmax%.6g_sec%d.bin",
                g.n_per_axis(), g.v_max(), sector);
  return dir + "/" + buf;
}

}  // namespace

std::optional<Eigen::MatrixXd> DenseCollision::load_cache(
    const std::string& path, const VelocityGrid& grid, int sector) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return std::nullopt;
  std::uint64_t magic = 0, nn = 0;
  std::int32_t n = 0, sec = 0;
  double vmax = 0.0;
  bool ok = std::fread(&magic, 8, 1, f) == 1 && std::fread(&n, 4, 1, f) == 1 &&
            std::fread(&sec, 4, 1, f) == 1 && std::fread(&vmax, 8, 1, f) == 1 &&
            std::fread(&nn, 8, 1, f) == 1;
  ok = ok && magic == kCacheMagic && n == grid.n_per_axis() && sec == sector &&
       vmax == grid.v_max() && nn == grid.size();
  if (!ok) {
    std::fclose(f);
    return std::nullopt;
  }
  Eigen::MatrixXd m(nn, nn);
  ok = std::fread(m.data(), sizeof(double), nn * nn, f) == nn * nn;
  std::fclose(f);
  if (!ok) return std::nullopt;
  return m;
}

void DenseCollision::save_cache(const std::string& path, const VelocityGrid& grid,
                                int sector, const Eigen::MatrixXd& m) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return;
  const std::uint64_t nn = grid.size();
  const std::int32_t n = grid.n_per_axis(), sec = sector;
  const double vmax = grid.v_max();
  std::fwrite(&kCacheMagic, 8, 1, f);
  std::fwrite(&n, 4, 1, f);
  std::fwrite(&sec, 4, 1, f);
  std::fwrite(&vmax, 8, 1, f);
  std::fwrite(&nn, 8, 1, f);
  std::fwrite(m.data(), sizeof(double), nn * nn, f);
  std::fclose(f);
}

DenseCollision::DenseCollision(const VelocityGrid& grid, const std::string& cache_dir)
    : grid_(&grid) {
  std::optional<Eigen::MatrixXd> sum, diff;
  if (!cache_dir.empty()) {
    std::filesystem::create_directories(cache_dir);
    sum = load_cache(cache_path(cache_dir, grid, 0), grid, 0);
    diff = load_cache(cache_path(cache_dir, grid, 1), grid, 1);
  }
  if (sum && diff) {
    l_sum_ = std::move(*sum);
    l_diff_ = std::move(*diff);
    from_cache_ = true;
    return;
  }
  KernelTable table(grid);
  l_sum_ = assemble_sector(grid, table, true);
  l_diff_ = assemble_sector(grid, table, false);
  if (!cache_dir.empty()) {
    save_cache(cache_path(cache_dir, grid, 0), grid, 0, l_sum_);
    save_cache(cache_path(cache_dir, grid, 1), grid, 1, l_diff_);
  }
}

namespace {

template <class T>
void to_sectors(const SpeciesPair<T>& g, Eigen::VectorXd& sr, Eigen::VectorXd& si,
                Eigen::VectorXd& dr, Eigen::VectorXd& di) {
  const std::size_t N = g.plus.size();
  sr.resize(N);
  dr.resize(N);
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  if constexpr (std::is_same_v<T, cplx>) {
    si.resize(N);
    di.resize(N);
    for (std::size_t m = 0; m < N; ++m) {
      const cplx s = (g.plus[m] + g.minus[m]) * inv_rt2;
      const cplx d = (g.plus[m] - g.minus[m]) * inv_rt2;
      sr[m] = s.real();
      si[m] = s.imag();
      dr[m] = d.real();
      di[m] = d.imag();
    }
  } else {
    for (std::size_t m = 0; m < N; ++m) {
      sr[m] = (g.plus[m] + g.minus[m]) * inv_rt2;
      dr[m] = (g.plus[m] - g.minus[m]) * inv_rt2;
    }
  }
}

}  // namespace

template <class T>
SpeciesPair<T> DenseCollision::apply(const SpeciesPair<T>& g) const {
  Eigen::VectorXd sr, si, dr, di;
  to_sectors(g, sr, si, dr, di);
  SpeciesPair<T> out(*grid_);
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  if constexpr (std::is_same_v<T, cplx>) {
    const Eigen::VectorXd ysr = l_sum_ * sr, ysi = l_sum_ * si;
    const Eigen::VectorXd ydr = l_diff_ * dr, ydi = l_diff_ * di;
    for (std::size_t m = 0; m < grid_->size(); ++m) {
      const cplx s(ysr[m], ysi[m]), d(ydr[m], ydi[m]);
      out.plus[m] = (s + d) * inv_rt2;
      out.minus[m] = (s - d) * inv_rt2;
    }
  } else {
    const Eigen::VectorXd ys = l_sum_ * sr, yd = l_diff_ * dr;
    for (std::size_t m = 0; m < grid_->size(); ++m) {
      out.plus[m] = (ys[m] + yd[m]) * inv_rt2;
      out.minus[m] = (ys[m] - yd[m]) * inv_rt2;
    }
  }
  return out;
}

template RealPair DenseCollision::apply(const RealPair&) const;
template ComplexPair DenseCollision::apply(const ComplexPair&) const;

template <class T>
double DenseCollision::quad_form(const SpeciesPair<T>& g) const {
  Eigen::VectorXd sr, si, dr, di;
  to_sectors(g, sr, si, dr, di);
  double q = sr.dot(l_sum_ * sr) + dr.dot(l_diff_ * dr);
  if constexpr (std::is_same_v<T, cplx>)
    q += si.dot(l_sum_ * si) + di.dot(l_diff_ * di);
  return q * grid_->weight();
}

template double DenseCollision::quad_form(const RealPair&) const;
template double DenseCollision::quad_form(const ComplexPair&) const;

namespace {

// Quadratic sigma-form Gram matrix per sector (sparse).
Eigen::SparseMatrix<double> sigma_gram(const VelocityGrid& g, double ell) {
  const std::size_t N = g.size();
  const double qw = g.weight();
  const auto st = build_stencils(g);
  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> trips;
  trips.reserve(N * 60);
  for (std::size_t m = 0; m < N; ++m) {
    const Vec3 v = g.node(m);
    const double br = 1.0 + dot(v, v);
    const double w2 = std::pow(br, ell);  // w_ell^2
    const double r = std::sqrt(dot(v, v));
    const Vec3 vh = {v[0] / r, v[1] / r, v[2] / r};
    trips.emplace_back(m, m, qw * w2 / br);

    // radial derivative row: sum_i vh_i D_i
    std::array<std::pair<std::int32_t, double>, 9> row;
    int cnt = 0;
    for (int i = 0; i < 3; ++i)
      for (const auto& e : st[m][i]) row[cnt++] = {e.node, vh[i] * e.coef};
    const double wrad = qw * w2 / (br * br * br);
    for (int a = 0; a < cnt; ++a)
      for (int b = 0; b < cnt; ++b)
        trips.emplace_back(row[a].first, row[b].first,
                           wrad * row[a].second * row[b].second);

    // cross rows: (grad x vh)_c
    const double wcr = qw * w2 / br;
    for (int c = 0; c < 3; ++c) {
      const int i1 = (c + 1) % 3, i2 = (c + 2) % 3;
      cnt = 0;
      for (const auto& e : st[m][i1]) row[cnt++] = {e.node, e.coef * vh[i2]};
      for (const auto& e : st[m][i2]) row[cnt++] = {e.node, -e.coef * vh[i1]};
      for (int a = 0; a < cnt; ++a)
        for (int b = 0; b < cnt; ++b)
          trips.emplace_back(row[a].first, row[b].first,
                             wcr * row[a].second * row[b].second);
    }
  }
  Eigen::SparseMatrix<double> gram(N, N);
  gram.setFromTriplets(trips.begin(), trips.end());
  return gram;
}

// Orthonormal basis (plain dot product) of the sector null space.
std::vector<Eigen::VectorXd> sector_null_basis(const VelocityGrid& g, bool sum_sector) {
  const RealField rt = sqrt_maxwellian(g);
  std::vector<Eigen::VectorXd> basis;
  auto add = [&](auto&& fn) {
    Eigen::VectorXd v(g.size());
    for (std::size_t m = 0; m < g.size(); ++m) v[m] = fn(g.node(m)) * rt[m];
    for (const auto& b : basis) v -= b.dot(v) * b;
    v.normalize();
    basis.push_back(std::move(v));
  };
  add([](const Vec3&) { return 1.0; });
  if (sum_sector) {
    for (int c = 0; c < 3; ++c)
      add([c](const Vec3& v) { return v[c]; });
    add([](const Vec3& v) { return dot(v, v); });
  }
  return basis;
}

double sector_eig_min(const Eigen::MatrixXd& l, const VelocityGrid& g,
                      double ell, bool sum_sector, std::uint64_t seed) {
  const std::size_t N = g.size();
  const auto gram = sigma_gram(g, ell);
  const auto null_basis = sector_null_basis(g, sum_sector);

  const double rho = 10.0 * l.diagonal().maxCoeff();
  Eigen::MatrixXd a = l;
  for (const auto& b : null_basis) a.noalias() += rho * b * b.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("coercivity: penalized operator not SPD");

  Rng rng(seed);
  Eigen::VectorXd x(N);
  for (std::size_t m = 0; m < N; ++m) x[m] = rng.normal();
  for (const auto& b : null_basis) x -= b.dot(x) * b;
  x.normalize();

  double lam = 0.0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd y = gram * x;
    Eigen::VectorXd z = llt.solve(y);
    for (const auto& b : null_basis) z -= b.dot(z) * b;
    z.normalize();
    const double num = z.dot(l * z), den = z.dot(gram * z);
    const double lam_new = num / den;
    x = z;
    if (it > 4 && std::abs(lam_new - lam) < 1e-9 * std::abs(lam_new)) {
      lam = lam_new;
      break;
    }
    lam = lam_new;
  }
  return lam;
}

}  // namespace

CoercivityReport coercivity_estimate(const DenseCollision& dense, double ell,
                                     int samples, std::uint64_t seed) {
  const VelocityGrid& g = dense.grid();
  const WeightSpec w = WeightSpec::power(ell);
  Projector proj(g);
  Rng rng(seed);

  CoercivityReport rep;
  rep.samples = samples;
  double smin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    RealPair gp = random_smooth_pair(g, rng);
    RealPair micro = proj.micro_part(gp);
    const double sig = sigma_norm(micro, w);
    if (sig < 1e-12) continue;
    const double q = dense.quad_form(micro);
    smin = std::min(smin, q / (sig * sig));
  }
  rep.sample_min = smin;

  const double e_sum = sector_eig_min(dense.sector_sum(), g, ell, true, seed ^ 0x9e3779b9ull);
  const double e_diff = sector_eig_min(dense.sector_diff(), g, ell, false, seed ^ 0x7f4a7c15ull);
  rep.eig_min = std::min(e_sum, e_diff);
  rep.lambda0 = std::min(rep.sample_min, rep.eig_min);
  return rep;
}

}  // namespace vpl
