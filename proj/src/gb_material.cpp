#include "sgcp/gb_material.hpp"

#include "sgcp/errors.hpp"

#include <cmath>

namespace sgcp {

void GbMaterialParams::validate() const {
  if (!(c_s >= 0.0)) throw ConfigError("gb: c_s must be >= 0");
  if (!(zeta_s >= 0.0)) throw ConfigError("gb: zeta_s must be >= 0");
  if (c_s == 0.0 && zeta_s > 0.0 && mode == GbMode::proposed) {
    throw ConfigError("gb: zeta_s > 0 requires c_s > 0");
  }
}

double GbOrientation::interaction(Grain I, int a, Grain J, int b) const {
  const ReducedSchmid& x = N(I, a);
  const ReducedSchmid& y = N(J, b);
  return x.s.dot(y.s) * x.c * y.c;
}

GbOrientation build_gb_orientation(std::span<const SlipSystem> slips_A,
                                   std::span<const SlipSystem> slips_B, const Vec2& n_s) {
  if (slips_A.size() != slips_B.size() || slips_A.size() > kMaxSlips) {
    throw MeshError("grain boundary: both grains need the same number of slip systems");
  }
  if (std::abs(n_s.norm() - 1.0) > 1e-12) throw MeshError("grain boundary normal not unit");
  GbOrientation o;
  o.n_s = n_s;
  o.n_slip = static_cast<int>(slips_A.size());
  auto reduce = [&](const SlipSystem& sys) {
    ReducedSchmid r;
    r.s = sys.s;
    r.c = sys.m.x() * n_s.y() - sys.m.y() * n_s.x();
    return r;
  };
  for (int a = 0; a < o.n_slip; ++a) {
    o.A[a] = reduce(slips_A[a]);
    o.B[a] = reduce(slips_B[a]);
  }
  return o;
}

Vec2 gb_burgers_increment(const GbOrientation& o, std::span<const double> dgamma_A,
                          std::span<const double> dgamma_B) {
  Vec2 dG = Vec2::Zero();
  for (int a = 0; a < o.n_slip; ++a) {
    dG += dgamma_B[a] * o.B[a].vec() - dgamma_A[a] * o.A[a].vec();
  }
  return dG;
}

GbPointState update_gb_stress(const GbPointState& state, const Vec2& dG,
                              const GbMaterialParams& p) {
  if (p.c_s == 0.0 && p.zeta_s > 0.0) {
    throw ConstitutiveError("gb: recovery with zero hardening coefficient");
  }
  GbPointState out = state;
  const double g = dG.norm();
  out.M = (p.c_s * dG + state.M) / (1.0 + p.zeta_s * g);
  out.G_cum = state.G_cum + g;
  out.D_inc = p.c_s > 0.0 ? (p.zeta_s / p.c_s) * g * out.M.squaredNorm() : 0.0;
  out.D_acc = state.D_acc + out.D_inc;
  return out;
}

double gb_traction(const GbOrientation& o, const Vec2& M, Grain grain, int alpha) {
  const ReducedSchmid& n = o.N(grain, alpha);
  return M.dot(n.s) * n.c;
}

GbStressTangent gb_stress_tangent(const GbPointState& state_new, const GbOrientation& o,
                                  const Vec2& dG, const GbMaterialParams& p) {
  GbStressTangent t;
  const double g = dG.norm();
  const double denom = 1.0 + p.zeta_s * g;
  const bool recovery = p.zeta_s > 0.0 && g > 0.0;
  auto column = [&](const Vec2& dGdg) -> Vec2 {
    Vec2 v = p.c_s * dGdg;
    if (recovery) v -= p.zeta_s * state_new.M * (dG.dot(dGdg) / g);
    return v / denom;
  };
  for (int b = 0; b < o.n_slip; ++b) {
    t.dM_dA[b] = column(-o.A[b].vec());
    t.dM_dB[b] = column(o.B[b].vec());
  }
  return t;
}

double gb_defect_energy(const GbPointState& state, const GbMaterialParams& p) {
  if (p.c_s == 0.0) return 0.0;
  return state.M.squaredNorm() / (2.0 * p.c_s);
}

}  // namespace sgcp
