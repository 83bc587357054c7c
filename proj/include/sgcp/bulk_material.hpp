#pragma once

// Material-point kernel for the bulk crystal: scalar and vector microscopic
// stresses, slip resistance, tangents and dissipation bookkeeping.
//
// All quantities are incremental over one step of length dt. Units are
// MPa, mm, s: xi is in MPa*mm, length scales in mm.

#include "sgcp/kinematics.hpp"

#include <array>
#include <span>

namespace sgcp {

enum class BulkModel {
  proposed,            // gap-free split of the slip gradient with AF-type recovery
  gurtin_energetic,    // xi = S0 L_en^2 kappa_t
  gurtin_dissipative,  // xi = S0 L_en^2 kappa_t + xi_dis(kappa_t rate)
};

struct BulkMaterialParams {
  ElasticLaw elastic;
  double S0 = 50.0;
  double d0_dot = 0.02;
  double m_rate = 0.05;
  double omega = 0.01;
  double Lstar = 0.0;
  double zeta = 0.0;
  double L_en = 0.0;
  double L_d = 0.0;
  BulkModel model = BulkModel::proposed;
  // h^{ab}; an empty matrix means no hardening.
  Eigen::MatrixXd hardening;

  void validate() const;

  /// Length scale of the defect energy for the selected model.
  double energetic_length() const {
    return model == BulkModel::proposed ? Lstar : L_en;
  }
  double energetic_modulus() const {
    const double L = energetic_length();
    return S0 * L * L;
  }
  double h(int a, int b) const {
    return hardening.size() == 0 ? 0.0 : hardening(a, b);
  }
};

/// Self/latent hardening matrix: h for coplanar pairs (m_a x m_b = 0), q*h otherwise.
Eigen::MatrixXd hardening_matrix(std::span<const SlipSystem> slips, double h, double q);

// ---------------------------------------------------------------------------
// Rate sensitivity

struct RateThreshold {
  double d_star = 0.0;  // switch rate between the linear and power branch
  double theta = 0.0;   // shift of the power branch
};

RateThreshold rate_threshold(const BulkMaterialParams& p);

/// R(rate): linear below d*, shifted power law above. C1 at d*.
double rate_sensitivity(double rate, const BulkMaterialParams& p);

/// dR/d(rate); the power-branch value is used at rate == d*.
double rate_sensitivity_derivative(double rate, const BulkMaterialParams& p);

/// pi = S R(|dgamma|/dt) sign(dgamma). Smooth through dgamma = 0.
double scalar_microstress(double dgamma, double S, double dt, const BulkMaterialParams& p);

// ---------------------------------------------------------------------------
// Evolution laws

void update_slip_resistance(std::span<const double> S_old, std::span<const double> ddbar,
                            const Eigen::MatrixXd& h, std::span<double> S_new);

/// Backward-Euler AF update: (S0 L*^2 dkappa_t + xi_old) / (1 + zeta ddbar).
Vec2 update_vector_microstress(const Vec2& xi_old, const Vec2& dkappa_t, double ddbar,
                               const BulkMaterialParams& p);

/// Diagonal entry d xi^a / d dgamma^a. Zero at dgamma == 0 and when zeta == 0.
Vec2 vector_microstress_tangent_gamma(const Vec2& xi_new, double ddbar, double dgamma,
                                      const BulkMaterialParams& p);

/// Diagonal block d xi^a / d dkappa^a.
Mat2 vector_microstress_tangent_kappa(const SlipSystem& sys, double ddbar,
                                      const BulkMaterialParams& p);

struct GurtinDissipativeStresses {
  std::array<double, kMaxSlips> pi{};
  std::array<Vec2, kMaxSlips> xi_dis = zero_vec2s<kMaxSlips>();
};

/// Viscoplastic law with effective rate sqrt(g^2 + L_d^2 |kdot_t|^2).
GurtinDissipativeStresses gurtin_dissipative_stresses(std::span<const double> dgamma,
                                                      std::span<const Vec2> dkappa_t, double dt,
                                                      std::span<const double> S,
                                                      const BulkMaterialParams& p);

/// Bulk dissipation over one step for the proposed/energetic models.
/// Throws ConstitutiveError if the result is negative beyond round-off.
double dissipation_increment(std::span<const double> pi, std::span<const double> dgamma,
                             std::span<const Vec2> xi, std::span<const double> ddbar,
                             const BulkMaterialParams& p);

/// sum xi.xi / (2 S0 L^2) with L the energetic length of the model.
double defect_energy_density(std::span<const Vec2> xi, const BulkMaterialParams& p);

// ---------------------------------------------------------------------------
// Quadrature-point update

struct BulkPointState {
  std::array<Vec2, kMaxSlips> xi = zero_vec2s<kMaxSlips>();       // total vector microscopic stress
  std::array<double, kMaxSlips> S{};      // slip resistance
  std::array<double, kMaxSlips> dbar{};   // accumulated |dgamma|
  std::array<double, kMaxSlips> rho_dis{};  // accumulated dissipative edge density
  double D_acc = 0.0;   // accumulated dissipation density
  double Dh_acc = 0.0;  // higher-order part of D_acc
  double D_inc = 0.0;   // dissipation of the last step
  double Dh_inc = 0.0;
  double Wdef = 0.0;    // defect energy density

  static BulkPointState virgin(int n_slip, double S0);
};

struct BulkPointInput {
  std::span<const SlipSystem> slips;
  std::span<const double> dgamma;  // slip increments
  std::span<const Vec2> dkappa;    // increments of the full slip gradient
  std::span<const Vec2> kappa;     // slip gradient at the end of the step
  double dt = 0.0;
};

struct BulkPointResponse {
  using MatKK = Eigen::Matrix<double, kMaxSlips, kMaxSlips>;
  using MatK2K = Eigen::Matrix<double, kMaxSlips, 2 * kMaxSlips>;
  using Mat2KK = Eigen::Matrix<double, 2 * kMaxSlips, kMaxSlips>;
  using Mat2K2K = Eigen::Matrix<double, 2 * kMaxSlips, 2 * kMaxSlips>;

  BulkPointState state;
  std::array<double, kMaxSlips> pi{};
  std::array<Vec2, kMaxSlips> xi = zero_vec2s<kMaxSlips>();
  // Rows/columns for system a: scalar index a, vector indices 2a, 2a+1.
  MatKK dpi_dgamma = MatKK::Zero();
  MatK2K dpi_dkappa = MatK2K::Zero();
  Mat2KK dxi_dgamma = Mat2KK::Zero();
  Mat2K2K dxi_dkappa = Mat2K2K::Zero();
};

BulkPointResponse update_bulk_point(const BulkPointState& old, const BulkPointInput& in,
                                    const BulkMaterialParams& p);

/// Energetic and dissipative edge densities recovered from a point state.
struct EdgeDensitySplit {
  double energetic = 0.0;
  double dissipative = 0.0;
};
EdgeDensitySplit edge_density_split(const BulkPointState& state, const SlipSystem& sys,
                                    int alpha, const BulkMaterialParams& p);

}  // namespace sgcp
