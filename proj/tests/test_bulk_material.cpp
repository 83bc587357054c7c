#include "sgcp/bulk_material.hpp"
#include "sgcp/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace sgcp;

namespace {

BulkMaterialParams table_params() {
  BulkMaterialParams p;
  p.elastic = ElasticLaw::from_young_poisson(260000.0, 0.3);
  p.S0 = 50.0;
  p.d0_dot = 0.02;
  p.m_rate = 0.05;
  p.omega = 0.01;
  return p;
}

// Drives one material point through a random history of slip and gradient increments.
struct Driver {
  std::vector<SlipSystem> slips;
  BulkMaterialParams p;
  BulkPointState state;
  std::vector<Vec2> kappa;

  Driver(std::vector<SlipSystem> s, BulkMaterialParams params)
      : slips(std::move(s)), p(std::move(params)),
        state(BulkPointState::virgin(static_cast<int>(slips.size()), p.S0)),
        kappa(slips.size(), Vec2::Zero()) {}

  BulkPointResponse step(const std::vector<double>& dg, const std::vector<Vec2>& dk, double dt) {
    for (std::size_t a = 0; a < slips.size(); ++a) kappa[a] += dk[a];
    BulkPointInput in{slips, dg, dk, kappa, dt};
    BulkPointResponse r = update_bulk_point(state, in, p);
    state = r.state;
    return r;
  }
};

struct RandomIncrement {
  std::vector<double> dg;
  std::vector<Vec2> dk;
};

RandomIncrement random_increment(std::mt19937& rng, int k) {
  RandomIncrement r;
  for (int a = 0; a < k; ++a) {
    const double mag = std::pow(10.0, test::uniform(rng, -6.0, -3.0));
    r.dg.push_back(test::uniform(rng, -1, 1) < 0.0 ? -mag : mag);
    r.dk.emplace_back(test::uniform(rng, -1, 1) * 1e-3, test::uniform(rng, -1, 1) * 1e-3);
  }
  return r;
}

}  // namespace

TEST_CASE("rate sensitivity is zero at rest and C1 at the threshold") {
  const BulkMaterialParams p = table_params();
  CHECK(rate_sensitivity(0.0, p) == 0.0);
  const RateThreshold t = rate_threshold(p);
  const double expected =
      (p.d0_dot / p.m_rate) * std::pow(1.0 / (p.omega * p.m_rate), 1.0 / (p.m_rate - 1.0));
  CHECK(t.d_star == doctest::Approx(expected).epsilon(1e-14));
  CHECK(t.theta == doctest::Approx(expected * (1.0 - p.m_rate)).epsilon(1e-14));

  const double lin = t.d_star / (p.omega * p.d0_dot);
  const double pow_branch = std::pow((t.d_star - t.theta) / p.d0_dot, p.m_rate);
  CHECK(std::abs(lin - pow_branch) <= 1e-10 * lin);
  const double dlin = 1.0 / (p.omega * p.d0_dot);
  const double dpow = (p.m_rate / p.d0_dot) * std::pow((t.d_star - t.theta) / p.d0_dot, p.m_rate - 1.0);
  CHECK(std::abs(dlin - dpow) <= 1e-10 * dlin);

  const double below = t.d_star * (1.0 - 1e-9), above = t.d_star * (1.0 + 1e-9);
  CHECK(std::abs(rate_sensitivity(below, p) - rate_sensitivity(above, p)) <= 1e-8 * lin);
  CHECK(std::abs(rate_sensitivity_derivative(below, p) - rate_sensitivity_derivative(above, p)) <=
        1e-6 * dlin);
}

TEST_CASE("rate sensitivity approaches the plain power law at high rates") {
  const BulkMaterialParams p = table_params();
  const RateThreshold t = rate_threshold(p);
  for (double f : {100.0, 1e3, 1e5}) {
    const double rate = f * t.theta;
    const double plain = std::pow(rate / p.d0_dot, p.m_rate);
    CHECK(std::abs(rate_sensitivity(rate, p) - plain) < 0.01 * plain);
  }
}

TEST_CASE("linear rate law has no threshold") {
  BulkMaterialParams p = table_params();
  p.m_rate = 1.0;
  CHECK(rate_threshold(p).d_star == 0.0);
  CHECK(rate_sensitivity(0.3, p) == doctest::Approx(0.3 / p.d0_dot));
}

TEST_CASE("scalar microstress is odd and follows the power branch") {
  const BulkMaterialParams p = table_params();
  CHECK(scalar_microstress(0.0, 50.0, 0.1, p) == 0.0);
  std::mt19937 rng(4);
  for (int i = 0; i < 50; ++i) {
    const double dg = std::pow(10.0, test::uniform(rng, -8.0, -2.0));
    const double dt = test::uniform(rng, 0.01, 1.0);
    const double S = test::uniform(rng, 50.0, 80.0);
    const double pp = scalar_microstress(dg, S, dt, p);
    CHECK(pp == -scalar_microstress(-dg, S, dt, p));
    CHECK(std::abs(pp) <= S * rate_sensitivity(dg / dt, p));
  }
  const double dt = 1.0, rate = 2.0;
  CHECK(scalar_microstress(rate * dt, 50.0, dt, p) ==
        doctest::Approx(50.0 * std::pow(rate / 0.02, 0.05)).epsilon(1e-3));
}

TEST_CASE("slip resistance update") {
  const std::vector<double> S_old{50.0, 60.0};
  std::vector<double> S_new(2);
  update_slip_resistance(S_old, std::vector<double>{0.1, 0.2}, Eigen::MatrixXd(), S_new);
  CHECK(S_new == S_old);
  const auto slips = std::vector<SlipSystem>{build_slip_system(deg_to_rad(60.0)),
                                             build_slip_system(deg_to_rad(-60.0))};
  const Eigen::MatrixXd H = hardening_matrix(slips, 1.0, 1.4);
  update_slip_resistance(S_old, std::vector<double>{0.0, 0.0}, H, S_new);
  CHECK(S_new == S_old);
  const double a = 0.003, b = 0.007;
  update_slip_resistance(S_old, std::vector<double>{a, b}, H, S_new);
  CHECK(S_new[0] == doctest::Approx(50.0 + a + 1.4 * b).epsilon(1e-14));
  CHECK(S_new[1] == doctest::Approx(60.0 + 1.4 * a + b).epsilon(1e-14));

  const auto same = std::vector<SlipSystem>{build_slip_system(0.3), build_slip_system(0.3 + M_PI)};
  const Eigen::MatrixXd Hs = hardening_matrix(same, 2.0, 1.4);
  CHECK(Hs(0, 1) == 2.0);
}

TEST_CASE("vector microstress update") {
  BulkMaterialParams p = table_params();
  p.Lstar = 1.0;
  p.zeta = 0.0;
  const Vec2 lin = update_vector_microstress(Vec2::Zero(), Vec2(0.002, 0), 0.0, p);
  CHECK(lin.isApprox(Vec2(50.0 * 0.002, 0)));

  p.zeta = 100.0;
  const Vec2 x = update_vector_microstress(Vec2::Zero(), Vec2(0.001, 0), 0.001, p);
  CHECK(x.x() == doctest::Approx(0.05 / 1.1).epsilon(1e-14));
  CHECK(x.y() == 0.0);

  // Repeated proportional driving saturates at S0 L^2 dkappa / (zeta dbar).
  Vec2 xi = Vec2::Zero();
  const Vec2 dk(3e-4, -1e-4);
  const double dd = 2e-3;
  for (int i = 0; i < 20000; ++i) xi = update_vector_microstress(xi, dk, dd, p);
  const Vec2 sat = p.S0 * dk / (p.zeta * dd);
  CHECK((xi - sat).norm() < 1e-10 * sat.norm());
}

TEST_CASE("vector microstress tangents") {
  BulkMaterialParams p = table_params();
  p.Lstar = 0.7;
  p.zeta = 0.0;
  CHECK(vector_microstress_tangent_gamma(Vec2(1, 2), 0.01, 0.01, p) == Vec2::Zero());
  const SlipSystem x = build_slip_system(0.0);
  Mat2 e;
  e << 1, 0, 0, 0;
  CHECK(vector_microstress_tangent_kappa(x, 0.0, p).isApprox(p.S0 * 0.49 * e));

  p.zeta = 300.0;
  const Vec2 xi_old(0.4, -0.2), dkt = Vec2(2e-3, 1e-3);
  const SlipSystem sys = build_slip_system(0.4);
  for (double dg : {3e-4, -2e-5}) {
    const Vec2 xi = update_vector_microstress(xi_old, tangential_slip_gradient(sys, dkt), std::abs(dg), p);
    const Vec2 an = vector_microstress_tangent_gamma(xi, std::abs(dg), dg, p);
    const double h = 1e-8;
    const Vec2 fd = (update_vector_microstress(xi_old, tangential_slip_gradient(sys, dkt), std::abs(dg + h), p) -
                     update_vector_microstress(xi_old, tangential_slip_gradient(sys, dkt), std::abs(dg - h), p)) /
                    (2.0 * h);
    CHECK((an - fd).norm() < 1e-5 * fd.norm());
  }
  const double dd = 4e-4;
  const Mat2 an = vector_microstress_tangent_kappa(sys, dd, p);
  Mat2 fd;
  for (int c = 0; c < 2; ++c) {
    Vec2 hp = dkt, hm = dkt;
    hp(c) += 1e-6;
    hm(c) -= 1e-6;
    fd.col(c) = (update_vector_microstress(xi_old, tangential_slip_gradient(sys, hp), dd, p) -
                 update_vector_microstress(xi_old, tangential_slip_gradient(sys, hm), dd, p)) /
                2e-6;
  }
  CHECK((an - fd).norm() < 1e-6 * an.norm());
}

TEST_CASE("dissipative baseline stresses") {
  BulkMaterialParams p = table_params();
  p.model = BulkModel::gurtin_dissipative;
  const double dt = 0.5;
  const std::vector<double> S{55.0};
  {
    p.L_d = 0.0;
    const double dg = 0.01;
    const std::vector<Vec2> dk{Vec2(0.3, 0.1)};
    const auto r = gurtin_dissipative_stresses(std::vector<double>{dg}, dk, dt, S, p);
    CHECK(r.xi_dis[0] == Vec2::Zero());
    CHECK(r.pi[0] == doctest::Approx(scalar_microstress(dg, S[0], dt, p)).epsilon(1e-14));
  }
  {
    p.L_d = 0.3;
    const std::vector<Vec2> dk{Vec2::Zero()};
    for (double dg : {0.02, -0.004}) {
      const auto r = gurtin_dissipative_stresses(std::vector<double>{dg}, dk, dt, S, p);
      CHECK(r.pi[0] == doctest::Approx(scalar_microstress(dg, S[0], dt, p)).epsilon(1e-14));
    }
  }
  {
    p.L_d = 0.3;
    const std::vector<Vec2> dk{Vec2(0.01, 0.0)};
    const auto r = gurtin_dissipative_stresses(std::vector<double>{0.0}, dk, dt, S, p);
    CHECK(r.pi[0] == 0.0);
    CHECK(r.xi_dis[0].norm() > 0.0);
  }
  const auto z = gurtin_dissipative_stresses(std::vector<double>{0.0}, std::vector<Vec2>{Vec2::Zero()},
                                             dt, S, p);
  CHECK(z.pi[0] == 0.0);
  CHECK(z.xi_dis[0] == Vec2::Zero());
}

TEST_CASE("dissipation increment") {
  BulkMaterialParams p = table_params();
  p.Lstar = 0.5;
  p.zeta = 0.0;
  const std::vector<Vec2> xi{Vec2(1, 1), Vec2(-1, 0)};
  CHECK(dissipation_increment(std::vector<double>{0, 0}, std::vector<double>{0, 0}, xi,
                              std::vector<double>{0, 0}, p) == 0.0);
  const std::vector<double> dg{1e-4, -3e-4};
  const std::vector<double> pi{scalar_microstress(dg[0], 50, 0.1, p), scalar_microstress(dg[1], 50, 0.1, p)};
  const double D = dissipation_increment(pi, dg, xi, std::vector<double>{1e-4, 3e-4}, p);
  CHECK(D == doctest::Approx(pi[0] * dg[0] + pi[1] * dg[1]));
  CHECK(D > 0.0);
  CHECK_THROWS_AS(dissipation_increment(std::vector<double>{-1.0}, std::vector<double>{1.0},
                                        std::vector<Vec2>{Vec2::Zero()}, std::vector<double>{1.0}, p),
                  ConstitutiveError);

  for (BulkModel m : {BulkModel::proposed, BulkModel::gurtin_energetic, BulkModel::gurtin_dissipative}) {
    std::mt19937 rng(5);
    BulkMaterialParams q = p;
    q.model = m;
    q.zeta = 800.0;
    q.L_en = 0.4;
    q.L_d = 0.2;
    const std::vector<SlipSystem> slips{build_slip_system(0.9), build_slip_system(-0.9)};
    q.hardening = hardening_matrix(slips, 100.0, 1.4);
    Driver d(slips, q);
    double acc = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const auto inc = random_increment(rng, 2);
      const auto r = d.step(inc.dg, inc.dk, 0.05);
      CHECK(r.state.D_inc >= 0.0);
      CHECK(r.state.D_acc >= acc);
      acc = r.state.D_acc;
    }
  }
}

TEST_CASE("defect energy density") {
  BulkMaterialParams p = table_params();
  p.Lstar = 0.5;
  CHECK(defect_energy_density(std::vector<Vec2>{Vec2::Zero()}, p) == 0.0);
  CHECK(defect_energy_density(std::vector<Vec2>{Vec2(3.0, 0)}, p) ==
        doctest::Approx(9.0 / (2.0 * 50.0 * 0.25)));
  p.Lstar = 0.0;
  CHECK(defect_energy_density(std::vector<Vec2>{Vec2::Zero()}, p) == 0.0);
  CHECK_THROWS_AS(defect_energy_density(std::vector<Vec2>{Vec2(1, 0)}, p), ConstitutiveError);
}

TEST_CASE("onset of yield carries no memory of the elastic history") {
  BulkMaterialParams p = table_params();
  p.Lstar = 0.8;
  p.zeta = 500.0;
  const std::vector<SlipSystem> slips{build_slip_system(0.3)};
  Driver d(slips, p);
  // Purely elastic steps leave xi at zero.
  for (int i = 0; i < 5; ++i) d.step({0.0}, {Vec2::Zero()}, 0.1);
  CHECK(d.state.xi[0] == Vec2::Zero());
  const double dg = 2e-4;
  const Vec2 dk(1e-3, 4e-4);
  const auto r = d.step({dg}, {dk}, 0.1);
  CHECK(r.pi[0] == doctest::Approx(p.S0 * rate_sensitivity(dg / 0.1, p)).epsilon(1e-14));
  const Vec2 expected = p.S0 * 0.64 * tangential_slip_gradient(slips[0], dk) / (1.0 + p.zeta * dg);
  CHECK((r.xi[0] - expected).norm() <= 1e-14 * expected.norm());
}

TEST_CASE("proposed model without recovery equals the energetic baseline") {
  std::mt19937 rng(6);
  const std::vector<SlipSystem> slips{build_slip_system(1.0), build_slip_system(-1.0)};
  BulkMaterialParams a = table_params();
  a.model = BulkModel::proposed;
  a.Lstar = 0.6;
  a.zeta = 0.0;
  a.hardening = hardening_matrix(slips, 50.0, 1.4);
  BulkMaterialParams b = a;
  b.model = BulkModel::gurtin_energetic;
  b.L_en = 0.6;
  Driver da(slips, a), db(slips, b);
  double peak = 0.0;  // summation roundoff scales with the largest xi seen
  for (int i = 0; i < 500; ++i) {
    const auto inc = random_increment(rng, 2);
    const auto ra = da.step(inc.dg, inc.dk, 0.02);
    const auto rb = db.step(inc.dg, inc.dk, 0.02);
    for (int s = 0; s < 2; ++s) {
      peak = std::max(peak, rb.xi[s].norm());
      CHECK(std::abs(ra.pi[s] - rb.pi[s]) <= 1e-12 * std::abs(rb.pi[s]));
      CHECK((ra.xi[s] - rb.xi[s]).norm() <= 1e-12 * peak);
    }
    // Defect energy from xi matches the one from the total gradient.
    CHECK(defect_energy_density(std::span(da.state.xi.data(), 2), a) ==
          doctest::Approx(db.state.Wdef).epsilon(1e-10));
  }
}

TEST_CASE("history invariants of the proposed model") {
  std::mt19937 rng(7);
  const std::vector<SlipSystem> slips{build_slip_system(0.5), build_slip_system(2.0)};
  BulkMaterialParams p = table_params();
  p.Lstar = 0.3;
  p.zeta = 700.0;
  p.hardening = hardening_matrix(slips, 20.0, 1.4);
  Driver d(slips, p);
  std::array<double, 2> bound{};
  for (int i = 0; i < 2000; ++i) {
    const auto inc = random_increment(rng, 2);
    const BulkPointState before = d.state;
    d.step(inc.dg, inc.dk, 0.01);
    for (int a = 0; a < 2; ++a) {
      CHECK(d.state.S[a] >= p.S0);
      CHECK(d.state.dbar[a] >= before.dbar[a]);
      const double dkt = tangential_slip_gradient(slips[a], inc.dk[a]).norm();
      bound[a] = std::max(bound[a], p.S0 * 0.09 * dkt / (p.zeta * std::abs(inc.dg[a])));
      CHECK(d.state.xi[a].norm() <= bound[a] * (1.0 + 1e-12));
      // Energetic plus dissipative density recovers the total.
      const EdgeDensitySplit split = edge_density_split(d.state, slips[a], a, p);
      const double total = edge_gnd_density(slips[a], d.kappa[a]);
      CHECK(std::abs(split.energetic + split.dissipative - total) < 1e-8);
    }
  }
}
