#pragma once

// Plane-strain kinematics shared by the bulk and grain-boundary kernels.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <numbers>

namespace sgcp {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
// Voigt ordering (11, 22, 12). Strains carry engineering shear 2*e12.
using Voigt = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Upper bound on slip systems per grain; per-point history is stored inline.
inline constexpr int kMaxSlips = 4;

// Eigen vectors are not zeroed by value-initialising a std::array.
template <std::size_t N>
std::array<Vec2, N> zero_vec2s() {
  std::array<Vec2, N> a;
  a.fill(Vec2::Zero());
  return a;
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// In-plane slip system inclined at theta to the +x1 axis.
struct SlipSystem {
  double theta = 0.0;  // radians
  Vec2 s = Vec2::UnitX();
  Vec2 m = Vec2::UnitY();
  Mat2 schmid = Mat2::Zero();      // s (x) m
  Mat2 schmid_sym = Mat2::Zero();  // sym(s (x) m)

  /// Symmetrized Schmid tensor as a Voigt strain vector (engineering shear).
  Voigt schmid_voigt() const {
    return {schmid_sym(0, 0), schmid_sym(1, 1), 2.0 * schmid_sym(0, 1)};
  }
};

SlipSystem build_slip_system(double theta);

/// (s . kappa) s
Vec2 tangential_slip_gradient(const SlipSystem& sys, const Vec2& kappa);

/// Edge GND density -s . kappa (1/length).
double edge_gnd_density(const SlipSystem& sys, const Vec2& kappa);

/// Isotropic linear elasticity restricted to plane strain.
struct ElasticLaw {
  double E = 0.0;
  double nu = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  Mat3 C = Mat3::Zero();  // maps Voigt strain (engineering shear) to stress

  static ElasticLaw from_young_poisson(double E, double nu);

  Voigt stress(const Voigt& elastic_strain) const { return C * elastic_strain; }

  // sigma33 = lambda tr(eps_e); carries no unknowns.
  double out_of_plane_stress(const Voigt& elastic_strain) const {
    return lambda * (elastic_strain(0) + elastic_strain(1));
  }

  double energy(const Voigt& elastic_strain) const {
    return 0.5 * elastic_strain.dot(C * elastic_strain);
  }
};

}  // namespace sgcp
