#include "sgcp/bulk_material.hpp"

#include "sgcp/errors.hpp"

#include <cmath>
#include <string>

namespace sgcp {

namespace {

double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// Coefficient of the defect energy, S0 L^2, with L the energetic length.
double energetic_coefficient(const BulkMaterialParams& p) { return p.energetic_modulus(); }

}  // namespace

void BulkMaterialParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("bulk material: ") + what);
  };
  require(S0 > 0.0, "S0 must be > 0");
  require(d0_dot > 0.0, "d0_dot must be > 0");
  require(m_rate > 0.0 && m_rate <= 1.0, "m_rate must satisfy 0 < m <= 1");
  require(omega > 0.0, "omega must be > 0");
  require(Lstar >= 0.0, "Lstar must be >= 0");
  require(zeta >= 0.0, "zeta must be >= 0");
  require(L_en >= 0.0, "L_en must be >= 0");
  require(L_d >= 0.0, "L_d must be >= 0");
  require(elastic.E > 0.0, "elastic law not initialised");
  require(hardening.size() == 0 || hardening.rows() == hardening.cols(),
          "hardening matrix must be square");
}

Eigen::MatrixXd hardening_matrix(std::span<const SlipSystem> slips, double h, double q) {
  const int k = static_cast<int>(slips.size());
  Eigen::MatrixXd H(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const Vec2& ma = slips[a].m;
      const Vec2& mb = slips[b].m;
      const bool coplanar = std::abs(ma.x() * mb.y() - ma.y() * mb.x()) < 1e-12;
      H(a, b) = coplanar ? h : q * h;
    }
  }
  return H;
}

RateThreshold rate_threshold(const BulkMaterialParams& p) {
  const double m = p.m_rate;
  if (m == 1.0) return {0.0, 0.0};  // linear law, nothing to regularize
  RateThreshold t;
  t.d_star = (p.d0_dot / m) * std::pow(1.0 / (p.omega * m), 1.0 / (m - 1.0));
  t.theta = t.d_star * (1.0 - m);
  return t;
}

double rate_sensitivity(double rate, const BulkMaterialParams& p) {
  const RateThreshold t = rate_threshold(p);
  if (rate <= t.d_star) return rate / (p.omega * p.d0_dot);
  return std::pow((rate - t.theta) / p.d0_dot, p.m_rate);
}

double rate_sensitivity_derivative(double rate, const BulkMaterialParams& p) {
  const RateThreshold t = rate_threshold(p);
  if (rate < t.d_star) return 1.0 / (p.omega * p.d0_dot);
  const double m = p.m_rate;
  return (m / p.d0_dot) * std::pow((rate - t.theta) / p.d0_dot, m - 1.0);
}

double scalar_microstress(double dgamma, double S, double dt, const BulkMaterialParams& p) {
  if (dgamma == 0.0) return 0.0;
  return S * rate_sensitivity(std::abs(dgamma) / dt, p) * sign_of(dgamma);
}

void update_slip_resistance(std::span<const double> S_old, std::span<const double> ddbar,
                            const Eigen::MatrixXd& h, std::span<double> S_new) {
  const std::size_t k = S_old.size();
  for (std::size_t a = 0; a < k; ++a) {
    double dS = 0.0;
    if (h.size() != 0) {
      for (std::size_t b = 0; b < k; ++b) dS += h(a, b) * ddbar[b];
    }
    S_new[a] = S_old[a] + dS;
  }
}

Vec2 update_vector_microstress(const Vec2& xi_old, const Vec2& dkappa_t, double ddbar,
                               const BulkMaterialParams& p) {
  return (energetic_coefficient(p) * dkappa_t + xi_old) / (1.0 + p.zeta * ddbar);
}

Vec2 vector_microstress_tangent_gamma(const Vec2& xi_new, double ddbar, double dgamma,
                                      const BulkMaterialParams& p) {
  if (p.zeta == 0.0 || dgamma == 0.0) return Vec2::Zero();
  return (-p.zeta / (1.0 + p.zeta * ddbar)) * sign_of(dgamma) * xi_new;
}

Mat2 vector_microstress_tangent_kappa(const SlipSystem& sys, double ddbar,
                                      const BulkMaterialParams& p) {
  return (energetic_coefficient(p) / (1.0 + p.zeta * ddbar)) * (sys.s * sys.s.transpose());
}

GurtinDissipativeStresses gurtin_dissipative_stresses(std::span<const double> dgamma,
                                                      std::span<const Vec2> dkappa_t, double dt,
                                                      std::span<const double> S,
                                                      const BulkMaterialParams& p) {
  GurtinDissipativeStresses out;
  const double Ld2 = p.L_d * p.L_d;
  for (std::size_t a = 0; a < dgamma.size(); ++a) {
    const double g = dgamma[a] / dt;
    const Vec2 k = dkappa_t[a] / dt;
    const double rate = std::sqrt(g * g + Ld2 * k.squaredNorm());
    if (rate == 0.0) continue;
    const double phi = S[a] * rate_sensitivity(rate, p) / rate;
    out.pi[a] = phi * g;
    out.xi_dis[a] = Ld2 * phi * k;
  }
  return out;
}

double dissipation_increment(std::span<const double> pi, std::span<const double> dgamma,
                             std::span<const Vec2> xi, std::span<const double> ddbar,
                             const BulkMaterialParams& p) {
  double D = 0.0;
  double scale = 0.0;
  const double coeff = energetic_coefficient(p);
  for (std::size_t a = 0; a < pi.size(); ++a) {
    const double w = pi[a] * dgamma[a];
    D += w;
    scale += std::abs(w);
    if (p.zeta > 0.0 && coeff > 0.0 && ddbar[a] > 0.0) {
      const double r = p.zeta * ddbar[a] * xi[a].squaredNorm() / coeff;
      D += r;
      scale += r;
    }
  }
  if (D < -1e-12 * scale) {
    throw ConstitutiveError("negative bulk dissipation increment: " + std::to_string(D));
  }
  return D;
}

double defect_energy_density(std::span<const Vec2> xi, const BulkMaterialParams& p) {
  const double coeff = energetic_coefficient(p);
  double sum = 0.0;
  for (const Vec2& x : xi) sum += x.squaredNorm();
  if (coeff == 0.0) {
    if (sum != 0.0) {
      throw ConstitutiveError("nonzero vector microstress with zero energetic length");
    }
    return 0.0;
  }
  return sum / (2.0 * coeff);
}

BulkPointState BulkPointState::virgin(int n_slip, double S0) {
  BulkPointState s;
  for (int a = 0; a < n_slip; ++a) s.S[a] = S0;
  return s;
}

namespace {

// Signed rate factor R(|dg|/dt) sign(dg) and its derivative with respect to dg.
struct SignedRate {
  double value = 0.0;
  double slope = 0.0;
};

SignedRate signed_rate(double dg, double dt, const BulkMaterialParams& p) {
  const double rate = std::abs(dg) / dt;
  SignedRate r;
  r.value = dg == 0.0 ? 0.0 : rate_sensitivity(rate, p) * sign_of(dg);
  r.slope = rate_sensitivity_derivative(rate, p) / dt;
  return r;
}

void update_proposed_like(const BulkPointState& old, const BulkPointInput& in,
                          const BulkMaterialParams& p, BulkPointResponse& out) {
  const int k = static_cast<int>(in.slips.size());
  const bool total_gradient = p.model == BulkModel::gurtin_energetic;
  const double coeff = energetic_coefficient(p);
  std::array<double, kMaxSlips> ad{};
  for (int a = 0; a < k; ++a) ad[a] = std::abs(in.dgamma[a]);

  BulkPointState& st = out.state;
  st = old;
  update_slip_resistance(std::span(old.S.data(), k), std::span(ad.data(), k), p.hardening,
                         std::span(st.S.data(), k));

  for (int a = 0; a < k; ++a) {
    const SlipSystem& sys = in.slips[a];
    const SignedRate r = signed_rate(in.dgamma[a], in.dt, p);
    out.pi[a] = st.S[a] * r.value;
    out.dpi_dgamma(a, a) += st.S[a] * r.slope;
    if (p.hardening.size() != 0) {
      for (int b = 0; b < k; ++b) {
        out.dpi_dgamma(a, b) += r.value * p.hardening(a, b) * sign_of(in.dgamma[b]);
      }
    }

    const Mat2 ss = sys.s * sys.s.transpose();
    if (total_gradient) {
      st.xi[a] = coeff * tangential_slip_gradient(sys, in.kappa[a]);
      out.dxi_dkappa.block<2, 2>(2 * a, 2 * a) = coeff * ss;
    } else {
      const Vec2 dkt = tangential_slip_gradient(sys, in.dkappa[a]);
      st.xi[a] = update_vector_microstress(old.xi[a], dkt, ad[a], p);
      out.dxi_dgamma.block<2, 1>(2 * a, a) =
          vector_microstress_tangent_gamma(st.xi[a], ad[a], in.dgamma[a], p);
      out.dxi_dkappa.block<2, 2>(2 * a, 2 * a) = vector_microstress_tangent_kappa(sys, ad[a], p);
    }
    out.xi[a] = st.xi[a];
    st.dbar[a] = old.dbar[a] + ad[a];
    if (!total_gradient && coeff > 0.0) {
      const double rho_en = -sys.s.dot(st.xi[a]) / coeff;
      st.rho_dis[a] = old.rho_dis[a] + p.zeta * ad[a] * rho_en;
    }
  }

  const double D = dissipation_increment(std::span(out.pi.data(), k), in.dgamma,
                                         std::span(st.xi.data(), k), std::span(ad.data(), k), p);
  double Dh = 0.0;
  if (!total_gradient && p.zeta > 0.0 && coeff > 0.0) {
    for (int a = 0; a < k; ++a) Dh += p.zeta * ad[a] * st.xi[a].squaredNorm() / coeff;
  }
  st.D_inc = D;
  st.Dh_inc = Dh;
  st.D_acc = old.D_acc + D;
  st.Dh_acc = old.Dh_acc + Dh;
  st.Wdef = defect_energy_density(std::span(st.xi.data(), k), p);
}

void update_gurtin_dissipative(const BulkPointState& old, const BulkPointInput& in,
                               const BulkMaterialParams& p, BulkPointResponse& out) {
  const int k = static_cast<int>(in.slips.size());
  const double coeff = energetic_coefficient(p);
  const double Ld2 = p.L_d * p.L_d;
  const double dt = in.dt;

  // Effective slip increments drive hardening.
  std::array<double, kMaxSlips> dd{};
  std::array<double, kMaxSlips> kt{};  // s . dkappa / dt
  for (int a = 0; a < k; ++a) {
    kt[a] = in.slips[a].s.dot(in.dkappa[a]) / dt;
    const double g = in.dgamma[a] / dt;
    dd[a] = std::sqrt(g * g + Ld2 * kt[a] * kt[a]) * dt;
  }

  BulkPointState& st = out.state;
  st = old;
  update_slip_resistance(std::span(old.S.data(), k), std::span(dd.data(), k), p.hardening,
                         std::span(st.S.data(), k));

  double D = 0.0;
  for (int a = 0; a < k; ++a) {
    const SlipSystem& sys = in.slips[a];
    const Vec2& s = sys.s;
    const Mat2 ss = s * s.transpose();
    const double g = in.dgamma[a] / dt;
    const double kk = kt[a];
    const double rate = dd[a] / dt;

    // phi = R / rate tends to R'(0) at rest, where the response is linear.
    const double R = rate > 0.0 ? rate_sensitivity(rate, p) : 0.0;
    const double dR = rate_sensitivity_derivative(rate, p);
    const double phi = rate > 0.0 ? R / rate : dR;
    const double dphi = rate > 0.0 ? (dR * rate - R) / (rate * rate) : 0.0;  // d phi / d rate
    const double Sa = st.S[a];
    out.pi[a] = Sa * phi * g;
    const Vec2 xi_dis = Ld2 * Sa * phi * kk * s;
    {
      const double drate_dg = rate > 0.0 ? g / rate : 0.0;         // per unit g
      const double drate_dk = rate > 0.0 ? Ld2 * kk / rate : 0.0;  // per unit k
      out.dpi_dgamma(a, a) += Sa * (phi + dphi * g * drate_dg) / dt;
      out.dpi_dkappa.block<1, 2>(a, 2 * a) = (Sa * dphi * g * drate_dk / dt) * s.transpose();
      out.dxi_dgamma.block<2, 1>(2 * a, a) = (Ld2 * Sa * dphi * kk * drate_dg / dt) * s;
      out.dxi_dkappa.block<2, 2>(2 * a, 2 * a) =
          (Ld2 * Sa * (phi + dphi * kk * drate_dk) / dt) * ss;

      if (p.hardening.size() != 0) {
        // dS_a/d(dgamma_b) and dS_a/d(dkappa_b) via dd_b.
        for (int b = 0; b < k; ++b) {
          const double hab = p.hardening(a, b);
          if (hab == 0.0 || dd[b] == 0.0) continue;
          const double gb = in.dgamma[b] / dt;
          const double rb = dd[b] / dt;
          const double ddb_dg = gb / rb;                 // d dd_b / d dgamma_b
          const double ddb_dk = Ld2 * kt[b] / rb;        // d dd_b / d (s_b . dkappa_b)
          const double pi_S = phi * g;
          const Vec2 xi_S = Ld2 * phi * kk * s;
          out.dpi_dgamma(a, b) += pi_S * hab * ddb_dg;
          out.dpi_dkappa.block<1, 2>(a, 2 * b) += (pi_S * hab * ddb_dk) * in.slips[b].s.transpose();
          out.dxi_dgamma.block<2, 1>(2 * a, b) += xi_S * hab * ddb_dg;
          out.dxi_dkappa.block<2, 2>(2 * a, 2 * b) +=
              (hab * ddb_dk) * xi_S * in.slips[b].s.transpose();
        }
      }
      D += Sa * R * rate * dt;
    }

    const Vec2 xi_en = coeff * tangential_slip_gradient(sys, in.kappa[a]);
    out.dxi_dkappa.block<2, 2>(2 * a, 2 * a) += coeff * ss;
    st.xi[a] = xi_en + xi_dis;
    out.xi[a] = st.xi[a];
    st.dbar[a] = old.dbar[a] + std::abs(in.dgamma[a]);
  }

  if (D < 0.0) throw ConstitutiveError("negative bulk dissipation increment");
  st.D_inc = D;
  st.D_acc = old.D_acc + D;
  // Higher-order dissipation: xi_dis . dkappa_t
  double Dh = 0.0;
  for (int a = 0; a < k; ++a) {
    const Vec2 xi_en = coeff * tangential_slip_gradient(in.slips[a], in.kappa[a]);
    Dh += (st.xi[a] - xi_en).dot(in.slips[a].s) * kt[a] * dt;
  }
  st.Dh_inc = Dh;
  st.Dh_acc = old.Dh_acc + Dh;

  double W = 0.0;
  if (coeff > 0.0) {
    for (int a = 0; a < k; ++a) {
      const double skap = in.slips[a].s.dot(in.kappa[a]);
      W += 0.5 * coeff * skap * skap;
    }
  }
  st.Wdef = W;
}

}  // namespace

BulkPointResponse update_bulk_point(const BulkPointState& old, const BulkPointInput& in,
                                    const BulkMaterialParams& p) {
  if (!(in.dt > 0.0)) throw ConstitutiveError("time increment must be positive");
  if (static_cast<int>(in.slips.size()) > kMaxSlips) {
    throw ConstitutiveError("too many slip systems at a material point");
  }
  BulkPointResponse out;
  if (p.model == BulkModel::gurtin_dissipative) {
    update_gurtin_dissipative(old, in, p, out);
  } else {
    update_proposed_like(old, in, p, out);
  }
  return out;
}

EdgeDensitySplit edge_density_split(const BulkPointState& state, const SlipSystem& sys,
                                    int alpha, const BulkMaterialParams& p) {
  EdgeDensitySplit out;
  const double coeff = energetic_coefficient(p);
  if (p.model == BulkModel::proposed && coeff > 0.0) {
    out.energetic = -sys.s.dot(state.xi[alpha]) / coeff;
    out.dissipative = state.rho_dis[alpha];
  }
  return out;
}

}  // namespace sgcp
