#include "vpl/macro.hpp"

namespace vpl {

namespace {
constexpr int kSymPairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
inline int sym_index(int i, int j) {
  if (i == j) return i;
  return 2 + i + j;  // (0,1)->3, (0,2)->4, (1,2)->5
}
}  // namespace

Projector::Projector(const VelocityGrid& g)
    : grid_(&g), sqrt_mu_(sqrt_maxwellian(g)), vv3_sqrt_mu_(g) {
  for (int i = 0; i < 3; ++i) {
    v_sqrt_mu_[i] = RealField(g);
    lam_sqrt_mu_[i] = RealField(g);
  }
  for (int c = 0; c < 6; ++c) vv_sqrt_mu_[c] = RealField(g);
  for (std::size_t m = 0; m < g.size(); ++m) {
    const Vec3 v = g.node(m);
    const double r2 = dot(v, v);
    const double s = sqrt_mu_[m];
    for (int i = 0; i < 3; ++i) {
      v_sqrt_mu_[i][m] = v[i] * s;
      lam_sqrt_mu_[i][m] = (r2 - 5.0) * v[i] * s;
    }
    for (int c = 0; c < 6; ++c)
      vv_sqrt_mu_[c][m] = v[kSymPairs[c][0]] * v[kSymPairs[c][1]] * s;
    vv3_sqrt_mu_[m] = (r2 - 3.0) * s;
  }

  for (int i = 0; i < 6; ++i) basis_[i] = RealPair(g);
  basis_[0].plus = sqrt_mu_;
  basis_[1].minus = sqrt_mu_;
  for (int i = 0; i < 3; ++i) {
    basis_[2 + i].plus = v_sqrt_mu_[i];
    basis_[2 + i].minus = v_sqrt_mu_[i];
  }
  basis_[5].plus = vv3_sqrt_mu_;
  basis_[5].minus = vv3_sqrt_mu_;

  Eigen::Matrix<double, 6, 6> s;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      s(i, j) = inner(basis_[i].plus, basis_[j].plus) +
                inner(basis_[i].minus, basis_[j].minus);
  gram_.compute(s);
}

template <class T>
T Projector::bracket(const RealField& psi, const Field<T>& f, bool damp) const {
  T acc{};
  if (!damp) {
    for (std::size_t m = 0; m < f.size(); ++m) acc += psi[m] * f[m];
  } else {
    for (std::size_t m = 0; m < f.size(); ++m) {
      const Vec3 v = grid_->node(m);
      const double br = 1.0 + dot(v, v);
      acc += psi[m] * f[m] / (br * br);
    }
  }
  return acc * T(grid_->weight());
}

template double Projector::bracket(const RealField&, const RealField&, bool) const;
template cplx Projector::bracket(const RealField&, const ComplexField&, bool) const;

template <class T>
MacroCoeffs<T> Projector::coefficients(const SpeciesPair<T>& f) const {
  std::array<T, 6> m{};
  for (int i = 0; i < 6; ++i)
    m[i] = bracket(basis_[i].plus, f.plus) + bracket(basis_[i].minus, f.minus);
  Eigen::Matrix<double, 6, 1> re, im;
  for (int i = 0; i < 6; ++i) {
    re[i] = std::real(cplx(m[i]));
    im[i] = std::imag(cplx(m[i]));
  }
  const Eigen::Matrix<double, 6, 1> cre = gram_.solve(re);
  const Eigen::Matrix<double, 6, 1> cim = gram_.solve(im);
  auto mk = [&](int i) -> T {
    if constexpr (std::is_same_v<T, cplx>)
      return cplx(cre[i], cim[i]);
    else
      return cre[i];
  };
  MacroCoeffs<T> out;
  out.a_plus = mk(0);
  out.a_minus = mk(1);
  for (int i = 0; i < 3; ++i) out.b[i] = mk(2 + i);
  out.c = mk(5);
  return out;
}

template MacroCoeffs<double> Projector::coefficients(const RealPair&) const;
template MacroCoeffs<cplx> Projector::coefficients(const ComplexPair&) const;

template <class T>
MacroCoeffs<T> Projector::raw_moments(const SpeciesPair<T>& f) const {
  MacroCoeffs<T> out;
  out.a_plus = bracket(sqrt_mu_, f.plus);
  out.a_minus = bracket(sqrt_mu_, f.minus);
  for (int i = 0; i < 3; ++i)
    out.b[i] = (bracket(v_sqrt_mu_[i], f.plus) + bracket(v_sqrt_mu_[i], f.minus)) * 0.5;
  out.c = (bracket(vv3_sqrt_mu_, f.plus) + bracket(vv3_sqrt_mu_, f.minus)) * (1.0 / 12.0);
  return out;
}

template MacroCoeffs<double> Projector::raw_moments(const RealPair&) const;
template MacroCoeffs<cplx> Projector::raw_moments(const ComplexPair&) const;

template <class T>
SpeciesPair<T> Projector::reconstruct(const MacroCoeffs<T>& c) const {
  SpeciesPair<T> out(*grid_);
  for (std::size_t m = 0; m < grid_->size(); ++m) {
    T shared = c.b[0] * v_sqrt_mu_[0][m] + c.b[1] * v_sqrt_mu_[1][m] +
               c.b[2] * v_sqrt_mu_[2][m] + c.c * vv3_sqrt_mu_[m];
    out.plus[m] = c.a_plus * sqrt_mu_[m] + shared;
    out.minus[m] = c.a_minus * sqrt_mu_[m] + shared;
  }
  return out;
}

template RealPair Projector::reconstruct(const MacroCoeffs<double>&) const;
template ComplexPair Projector::reconstruct(const MacroCoeffs<cplx>&) const;

template <class T>
SpeciesPair<T> Projector::project(const SpeciesPair<T>& f) const {
  return reconstruct(coefficients(f));
}

template RealPair Projector::project(const RealPair&) const;
template ComplexPair Projector::project(const ComplexPair&) const;

template <class T>
SpeciesPair<T> Projector::micro_part(const SpeciesPair<T>& f) const {
  SpeciesPair<T> out = f;
  out -= project(f);
  return out;
}

template RealPair Projector::micro_part(const RealPair&) const;
template ComplexPair Projector::micro_part(const ComplexPair&) const;

template <class T>
HighMoments<T> Projector::high_moments(const SpeciesPair<T>& f) const {
  HighMoments<T> out;
  const T mass_p = bracket(sqrt_mu_, f.plus);
  const T mass_m = bracket(sqrt_mu_, f.minus);
  for (int c = 0; c < 6; ++c) {
    out.theta_plus[c] = bracket(vv_sqrt_mu_[c], f.plus) - mass_p;
    out.theta_minus[c] = bracket(vv_sqrt_mu_[c], f.minus) - mass_m;
  }
  for (int i = 0; i < 3; ++i) {
    out.lambda_plus[i] = bracket(lam_sqrt_mu_[i], f.plus) * 0.1;
    out.lambda_minus[i] = bracket(lam_sqrt_mu_[i], f.minus) * 0.1;
  }
  return out;
}

template HighMoments<double> Projector::high_moments(const RealPair&) const;
template HighMoments<cplx> Projector::high_moments(const ComplexPair&) const;

namespace {

// Everything one time sample contributes to the balance laws.
struct SampleQ {
  MacroCoeffs<cplx> raw;
  std::array<cplx, 2> vm[3];    // <v_i sqrt(mu), micro_pm>
  std::array<cplx, 2> vvm[6];   // <v_i v_j sqrt(mu), micro_pm>
  std::array<cplx, 2> e3;       // <(|v|^2-3) sqrt(mu), micro_pm>
  std::array<cplx, 2> e3v[3];   // <(|v|^2-3) v_i sqrt(mu), micro_pm>
  HighMoments<cplx> hm_micro;   // Theta/Lambda of the micro part
  std::array<cplx, 3> j_hat;    // <v sqrt(mu), f_+ - f_->
  HighMoments<cplx> hm_l;       // of l_pm = -i(v.k) micro_pm - (L f)_pm
  HighMoments<cplx> hm_g;
  std::array<cplx, 2> g_mass, g_e3;
  std::array<cplx, 2> g_mom[3];
  std::array<cplx, 2> lf_mom[3];  // <v_i sqrt(mu), (L f)_pm>
  std::array<cplx, 2> lf_e3;      // <(|v|^2-3) sqrt(mu), (L f)_pm>
  std::array<cplx, 3> lmicro_mom_diff;  // <v sqrt(mu), (L micro)_+ - (L micro)_->
};

SampleQ eval_sample(const ModeMomentSample& s, const Vec3& k,
                    const std::function<ComplexPair(const ComplexPair&)>& apply_L,
                    const Projector& proj, bool damp) {
  const VelocityGrid& grid = proj.grid();
  SampleQ q;
  q.raw = proj.raw_moments(s.f);
  const ComplexPair micro = proj.micro_part(s.f);
  const ComplexPair lf = apply_L(s.f);
  const ComplexPair lmicro = apply_L(micro);
  ComplexPair l_field(grid);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const Vec3 v = grid.node(m);
    const cplx itransport(0.0, dot(v, k));
    l_field.plus[m] = -itransport * micro.plus[m] - lf.plus[m];
    l_field.minus[m] = -itransport * micro.minus[m] - lf.minus[m];
  }

  RealField e3(grid);
  std::array<RealField, 3> e3vf{RealField(grid), RealField(grid), RealField(grid)};
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const Vec3 v = grid.node(m);
    const double w = (dot(v, v) - 3.0) * proj.sqrt_mu()[m];
    e3[m] = w;
    for (int i = 0; i < 3; ++i) e3vf[i][m] = w * v[i];
  }

  // Damped high moments need damped brackets, so recompute them directly.
  auto high = [&](const ComplexPair& f) {
    HighMoments<cplx> hm;
    const cplx mp = proj.bracket(proj.sqrt_mu(), f.plus, damp);
    const cplx mm = proj.bracket(proj.sqrt_mu(), f.minus, damp);
    for (int c = 0; c < 6; ++c) {
      hm.theta_plus[c] = proj.bracket(proj.vv_sqrt_mu(c), f.plus, damp) - mp;
      hm.theta_minus[c] = proj.bracket(proj.vv_sqrt_mu(c), f.minus, damp) - mm;
    }
    for (int i = 0; i < 3; ++i) {
      RealField lam(grid);
      for (std::size_t m = 0; m < grid.size(); ++m) {
        const Vec3 v = grid.node(m);
        lam[m] = (dot(v, v) - 5.0) * v[i] * proj.sqrt_mu()[m];
      }
      hm.lambda_plus[i] = proj.bracket(lam, f.plus, damp) * 0.1;
      hm.lambda_minus[i] = proj.bracket(lam, f.minus, damp) * 0.1;
    }
    return hm;
  };

  if (damp) {
    // Re-evaluate the raw coefficients with the damped quadrature too.
    q.raw.a_plus = proj.bracket(proj.sqrt_mu(), s.f.plus, true);
    q.raw.a_minus = proj.bracket(proj.sqrt_mu(), s.f.minus, true);
    for (int i = 0; i < 3; ++i)
      q.raw.b[i] = 0.5 * (proj.bracket(proj.v_sqrt_mu(i), s.f.plus, true) +
                          proj.bracket(proj.v_sqrt_mu(i), s.f.minus, true));
    q.raw.c = (proj.bracket(e3, s.f.plus, true) +
               proj.bracket(e3, s.f.minus, true)) / 12.0;
  }

  q.hm_micro = high(micro);
  q.hm_l = high(l_field);
  q.hm_g = high(s.g);
  for (int sp = 0; sp < 2; ++sp) {
    const ComplexField& mf = sp == 0 ? micro.plus : micro.minus;
    const ComplexField& gf = sp == 0 ? s.g.plus : s.g.minus;
    const ComplexField& lff = sp == 0 ? lf.plus : lf.minus;
    for (int i = 0; i < 3; ++i) {
      q.vm[i][sp] = proj.bracket(proj.v_sqrt_mu(i), mf, damp);
      q.g_mom[i][sp] = proj.bracket(proj.v_sqrt_mu(i), gf, damp);
      q.lf_mom[i][sp] = proj.bracket(proj.v_sqrt_mu(i), lff, damp);
      q.e3v[i][sp] = proj.bracket(e3vf[i], mf, damp);
    }
    for (int c = 0; c < 6; ++c)
      q.vvm[c][sp] = proj.bracket(proj.vv_sqrt_mu(c), mf, damp);
    q.e3[sp] = proj.bracket(e3, mf, damp);
    q.g_e3[sp] = proj.bracket(e3, gf, damp);
    q.lf_e3[sp] = proj.bracket(e3, lff, damp);
    q.g_mass[sp] = proj.bracket(proj.sqrt_mu(), gf, damp);
  }
  for (int i = 0; i < 3; ++i) {
    q.j_hat[i] = proj.bracket(proj.v_sqrt_mu(i), s.f.plus, damp) -
                 proj.bracket(proj.v_sqrt_mu(i), s.f.minus, damp);
    q.lmicro_mom_diff[i] = proj.bracket(proj.v_sqrt_mu(i), lmicro.plus, damp) -
                           proj.bracket(proj.v_sqrt_mu(i), lmicro.minus, damp);
  }
  return q;
}

std::vector<std::pair<std::string, cplx>> sample_residuals(
    const SampleQ& qm, const SampleQ& q0, const SampleQ& qp, double dt,
    const Vec3& k, cplx phi) {
  const cplx I(0.0, 1.0);
  std::array<cplx, 3> e_hat = {-I * k[0] * phi, -I * k[1] * phi, -I * k[2] * phi};
  std::vector<std::pair<std::string, cplx>> out;
  out.reserve(64);
  auto ddt = [&](auto&& get) { return (get(qp) - get(qm)) / (2.0 * dt); };

  for (int sp = 0; sp < 2; ++sp) {
    const double sgn = sp == 0 ? 1.0 : -1.0;
    const std::string tag = sp == 0 ? "_p" : "_m";
    auto a_of = [sp](const SampleQ& q) {
      return sp == 0 ? q.raw.a_plus : q.raw.a_minus;
    };
    auto theta_of = [sp](const SampleQ& q, int c) {
      return sp == 0 ? q.hm_micro.theta_plus[c] : q.hm_micro.theta_minus[c];
    };
    auto lambda_of = [sp](const SampleQ& q, int i) {
      return sp == 0 ? q.hm_micro.lambda_plus[i] : q.hm_micro.lambda_minus[i];
    };

    cplx r = ddt(a_of);
    for (int i = 0; i < 3; ++i) r += I * k[i] * (q0.raw.b[i] + q0.vm[i][sp]);
    r -= q0.g_mass[sp];
    out.push_back({"mass" + tag, r});

    for (int i = 0; i < 3; ++i) {
      cplx rm = ddt([&](const SampleQ& q) { return q.raw.b[i] + q.vm[i][sp]; });
      rm += I * k[i] * (a_of(q0) + 2.0 * q0.raw.c) - sgn * 2.0 * e_hat[i];
      for (int j = 0; j < 3; ++j)
        rm += I * k[j] * q0.vvm[sym_index(i, j)][sp];
      rm -= q0.g_mom[i][sp] - q0.lf_mom[i][sp];
      out.push_back({"momentum" + tag + std::to_string(i + 1), rm});
    }

    cplx re = ddt([&](const SampleQ& q) { return q.raw.c + q.e3[sp] / 6.0; });
    for (int i = 0; i < 3; ++i)
      re += I * k[i] * (q0.raw.b[i] / 3.0 + q0.e3v[i][sp] / 6.0);
    re -= (q0.g_e3[sp] - q0.lf_e3[sp]) / 6.0;
    out.push_back({"energy" + tag, re});

    // High-moment equations.
    for (int i = 0; i < 3; ++i) {
      cplx rt = ddt([&](const SampleQ& q) { return theta_of(q, i) + 2.0 * q.raw.c; });
      rt += 2.0 * I * k[i] * q0.raw.b[i];
      rt -= (sp == 0 ? q0.hm_l.theta_plus[i] + q0.hm_g.theta_plus[i]
                     : q0.hm_l.theta_minus[i] + q0.hm_g.theta_minus[i]);
      out.push_back({"theta_diag" + tag + std::to_string(i + 1), rt});
    }
    for (int c = 3; c < 6; ++c) {
      const int i = kSymPairs[c][0], j = kSymPairs[c][1];
      cplx rt = ddt([&](const SampleQ& q) { return theta_of(q, c); });
      rt += I * k[j] * q0.raw.b[i] + I * k[i] * q0.raw.b[j];
      for (int cc = 0; cc < 3; ++cc) rt += I * k[cc] * q0.vm[cc][sp];
      rt -= (sp == 0 ? q0.hm_l.theta_plus[c] + q0.hm_g.theta_plus[c]
                     : q0.hm_l.theta_minus[c] + q0.hm_g.theta_minus[c]);
      rt -= q0.g_mass[sp];
      out.push_back({"theta_off" + tag + std::to_string(i + 1) + std::to_string(j + 1), rt});
    }
    for (int i = 0; i < 3; ++i) {
      cplx rl = ddt([&](const SampleQ& q) { return lambda_of(q, i); });
      rl += I * k[i] * q0.raw.c;
      rl -= (sp == 0 ? q0.hm_l.lambda_plus[i] + q0.hm_g.lambda_plus[i]
                     : q0.hm_l.lambda_minus[i] + q0.hm_g.lambda_minus[i]);
      out.push_back({"lambda" + tag + std::to_string(i + 1), rl});
    }
  }

  // Species means.
  {
    cplx r = ddt([](const SampleQ& q) { return 0.5 * (q.raw.a_plus + q.raw.a_minus); });
    for (int i = 0; i < 3; ++i) r += I * k[i] * q0.raw.b[i];
    r -= 0.5 * (q0.g_mass[0] + q0.g_mass[1]);
    out.push_back({"mean_mass", r});

    for (int i = 0; i < 3; ++i) {
      cplx rm = ddt([&](const SampleQ& q) { return q.raw.b[i]; });
      rm += I * k[i] * (0.5 * (q0.raw.a_plus + q0.raw.a_minus) + 2.0 * q0.raw.c);
      for (int j = 0; j < 3; ++j) {
        const int c = sym_index(i, j);
        rm += 0.5 * I * k[j] *
              (q0.hm_micro.theta_plus[c] + q0.hm_micro.theta_minus[c]);
      }
      rm -= 0.5 * (q0.g_mom[i][0] + q0.g_mom[i][1]);
      out.push_back({"mean_momentum" + std::to_string(i + 1), rm});
    }

    cplx rc = ddt([](const SampleQ& q) { return q.raw.c; });
    for (int i = 0; i < 3; ++i) {
      rc += I * k[i] * q0.raw.b[i] / 3.0;
      rc += (5.0 / 6.0) * I * k[i] *
            (q0.hm_micro.lambda_plus[i] + q0.hm_micro.lambda_minus[i]);
    }
    rc -= (q0.g_e3[0] + q0.g_e3[1]) / 12.0;
    out.push_back({"mean_energy", rc});

    for (int c = 0; c < 6; ++c) {
      const int i = kSymPairs[c][0], j = kSymPairs[c][1];
      cplx rt = ddt([&](const SampleQ& q) {
        cplx v = 0.5 * (q.hm_micro.theta_plus[c] + q.hm_micro.theta_minus[c]);
        if (i == j) v += 2.0 * q.raw.c;
        return v;
      });
      rt += I * k[i] * q0.raw.b[j] + I * k[j] * q0.raw.b[i];
      rt -= 0.5 * (q0.hm_l.theta_plus[c] + q0.hm_l.theta_minus[c] +
                   q0.hm_g.theta_plus[c] + q0.hm_g.theta_minus[c]);
      if (i != j) rt -= 0.5 * (q0.g_mass[0] + q0.g_mass[1]);
      out.push_back({"mean_theta" + std::to_string(i + 1) + std::to_string(j + 1), rt});
    }
    for (int i = 0; i < 3; ++i) {
      cplx rl = ddt([&](const SampleQ& q) {
        return 0.5 * (q.hm_micro.lambda_plus[i] + q.hm_micro.lambda_minus[i]);
      });
      rl += I * k[i] * q0.raw.c;
      rl -= 0.5 * (q0.hm_l.lambda_plus[i] + q0.hm_l.lambda_minus[i] +
                   q0.hm_g.lambda_plus[i] + q0.hm_g.lambda_minus[i]);
      out.push_back({"mean_lambda" + std::to_string(i + 1), rl});
    }
  }

  // Species differences and the continuity equation.
  {
    cplx r = ddt([](const SampleQ& q) { return q.raw.a_plus - q.raw.a_minus; });
    cplx flux{};
    for (int i = 0; i < 3; ++i) flux += I * k[i] * q0.j_hat[i];
    out.push_back({"continuity", r + flux});
    out.push_back({"diff_mass", r + flux - (q0.g_mass[0] - q0.g_mass[1])});

    for (int i = 0; i < 3; ++i) {
      cplx rm = ddt([&](const SampleQ& q) { return q.j_hat[i]; });
      rm += I * k[i] * (q0.raw.a_plus - q0.raw.a_minus) - 4.0 * e_hat[i];
      for (int j = 0; j < 3; ++j) {
        const int c = sym_index(i, j);
        rm += I * k[j] * (q0.hm_micro.theta_plus[c] - q0.hm_micro.theta_minus[c]);
      }
      rm -= (q0.g_mom[i][0] - q0.g_mom[i][1]) - q0.lmicro_mom_diff[i];
      out.push_back({"diff_momentum" + std::to_string(i + 1), rm});
    }
  }
  return out;
}

}  // namespace

std::vector<MomentResidualRow> moment_residuals(
    const std::vector<ModeMomentSample>& traj, const Vec3& k,
    const std::function<ComplexPair(const ComplexPair&)>& apply_L,
    const Projector& proj) {
  if (traj.size() < 3)
    throw std::invalid_argument("moment_residuals: need at least 3 samples");
  const double dt = traj[1].t - traj[0].t;

  std::vector<SampleQ> plain(traj.size()), damped(traj.size());
  for (std::size_t n = 0; n < traj.size(); ++n) {
    plain[n] = eval_sample(traj[n], k, apply_L, proj, false);
    damped[n] = eval_sample(traj[n], k, apply_L, proj, true);
  }

  std::vector<MomentResidualRow> rows;
  for (std::size_t n = 1; n + 1 < traj.size(); ++n) {
    const auto pr = sample_residuals(plain[n - 1], plain[n], plain[n + 1], dt, k,
                                     traj[n].phi_hat);
    const auto dr = sample_residuals(damped[n - 1], damped[n], damped[n + 1], dt,
                                     k, traj[n].phi_hat);
    for (std::size_t i = 0; i < pr.size(); ++i)
      rows.push_back({pr[i].first, traj[n].t, std::abs(pr[i].second),
                      std::abs(dr[i].second)});
  }
  return rows;
}

std::vector<double> compatibility_defect(const std::vector<ModeMomentSample>& traj,
                                         const Projector& proj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& s : traj)
    out.push_back(std::abs(proj.bracket(proj.sqrt_mu(), s.g.plus) -
                           proj.bracket(proj.sqrt_mu(), s.g.minus)));
  return out;
}

}  // namespace vpl
