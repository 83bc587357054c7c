#include "sgcp/kinematics.hpp"

#include "sgcp/errors.hpp"

#include <cmath>

namespace sgcp {

SlipSystem build_slip_system(double theta) {
  SlipSystem sys;
  sys.theta = theta;
  sys.s = Vec2(std::cos(theta), std::sin(theta));
  sys.m = Vec2(-std::sin(theta), std::cos(theta));
  sys.schmid = sys.s * sys.m.transpose();
  sys.schmid_sym = 0.5 * (sys.schmid + sys.schmid.transpose());
  return sys;
}

Vec2 tangential_slip_gradient(const SlipSystem& sys, const Vec2& kappa) {
  return sys.s.dot(kappa) * sys.s;
}

double edge_gnd_density(const SlipSystem& sys, const Vec2& kappa) {
  return -sys.s.dot(kappa);
}

ElasticLaw ElasticLaw::from_young_poisson(double E, double nu) {
  if (!(E > 0.0) || !(nu > -1.0 && nu < 0.5)) {
    throw ConfigError("elastic constants out of range (E > 0, -1 < nu < 0.5)");
  }
  ElasticLaw law;
  law.E = E;
  law.nu = nu;
  law.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  law.mu = E / (2.0 * (1.0 + nu));
  const double l = law.lambda, m = law.mu;
  law.C << l + 2.0 * m, l, 0.0,
           l, l + 2.0 * m, 0.0,
           0.0, 0.0, m;
  return law;
}

}  // namespace sgcp
