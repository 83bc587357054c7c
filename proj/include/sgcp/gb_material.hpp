#pragma once

// Grain-boundary kernel in the 2D reduced form. The GB Burgers tensor, the GB
// stress M and the orientation tensors N only have (i,3) slots in the plane,
// so each is stored as a 2-vector.

#include "sgcp/kinematics.hpp"

#include <array>
#include <span>

namespace sgcp {

enum class GbMode { proposed, micro_free, micro_hard };

enum class Grain { A = 0, B = 1 };

struct GbMaterialParams {
  double c_s = 0.0;     // MPa*mm
  double zeta_s = 0.0;
  GbMode mode = GbMode::proposed;

  void validate() const;
};

// N = c (s (x) e3), c = (m x n_s) . e3
struct ReducedSchmid {
  Vec2 s = Vec2::Zero();
  double c = 0.0;
  Vec2 vec() const { return c * s; }
};

struct GbOrientation {
  Vec2 n_s = Vec2::UnitX();  // from grain A to grain B
  int n_slip = 0;
  std::array<ReducedSchmid, kMaxSlips> A{};
  std::array<ReducedSchmid, kMaxSlips> B{};

  const ReducedSchmid& N(Grain g, int alpha) const {
    return g == Grain::A ? A[alpha] : B[alpha];
  }
  /// C^{ab}_{IJ} = N_I^a : N_J^b
  double interaction(Grain I, int a, Grain J, int b) const;
};

GbOrientation build_gb_orientation(std::span<const SlipSystem> slips_A,
                                   std::span<const SlipSystem> slips_B, const Vec2& n_s);

/// dG = sum_a (dgB_a c_B s_B - dgA_a c_A s_A)
Vec2 gb_burgers_increment(const GbOrientation& o, std::span<const double> dgamma_A,
                          std::span<const double> dgamma_B);

struct GbPointState {
  Vec2 M = Vec2::Zero();
  double G_cum = 0.0;
  double D_acc = 0.0;
  double D_inc = 0.0;
};

/// Backward-Euler AF update of M with GB dissipation bookkeeping.
GbPointState update_gb_stress(const GbPointState& state, const Vec2& dG,
                              const GbMaterialParams& p);

double gb_traction(const GbOrientation& o, const Vec2& M, Grain grain, int alpha);

struct GbStressTangent {
  std::array<Vec2, kMaxSlips> dM_dA = zero_vec2s<kMaxSlips>();
  std::array<Vec2, kMaxSlips> dM_dB = zero_vec2s<kMaxSlips>();
};

GbStressTangent gb_stress_tangent(const GbPointState& state_new, const GbOrientation& o,
                                  const Vec2& dG, const GbMaterialParams& p);

/// M.M / (2 c_s); zero for c_s == 0.
double gb_defect_energy(const GbPointState& state, const GbMaterialParams& p);

}  // namespace sgcp
