#include "sgcp/fem.hpp"

#include "sgcp/errors.hpp"

#include <cmath>
#include <exception>
#include <string>

namespace sgcp {

Q8Shape q8_shape(double xi, double eta) {
  Q8Shape s;
  const auto& nc = q8_node_coords();
  for (int i = 0; i < 4; ++i) {
    const double xa = nc[i].x(), ya = nc[i].y();
    const double a = 1.0 + xi * xa, b = 1.0 + eta * ya;
    s.N(i) = 0.25 * a * b * (xi * xa + eta * ya - 1.0);
    s.dN(i, 0) = 0.25 * xa * b * (2.0 * xi * xa + eta * ya);
    s.dN(i, 1) = 0.25 * ya * a * (xi * xa + 2.0 * eta * ya);
  }
  for (int i = 4; i < 8; ++i) {
    const double xa = nc[i].x(), ya = nc[i].y();
    if (xa == 0.0) {
      s.N(i) = 0.5 * (1.0 - xi * xi) * (1.0 + eta * ya);
      s.dN(i, 0) = -xi * (1.0 + eta * ya);
      s.dN(i, 1) = 0.5 * ya * (1.0 - xi * xi);
    } else {
      s.N(i) = 0.5 * (1.0 + xi * xa) * (1.0 - eta * eta);
      s.dN(i, 0) = 0.5 * xa * (1.0 - eta * eta);
      s.dN(i, 1) = -eta * (1.0 + xi * xa);
    }
  }
  return s;
}

const std::array<Vec2, 8>& q8_node_coords() {
  static const std::array<Vec2, 8> c = {Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1),
                                        Vec2(0, -1),  Vec2(1, 0),  Vec2(0, 1), Vec2(-1, 0)};
  return c;
}

const std::array<GaussPoint1D, 3>& gauss3() {
  static const double a = std::sqrt(0.6);
  static const std::array<GaussPoint1D, 3> g = {
      GaussPoint1D{-a, 5.0 / 9.0}, GaussPoint1D{0.0, 8.0 / 9.0}, GaussPoint1D{a, 5.0 / 9.0}};
  return g;
}

LineShape line3_shape(double xi) {
  LineShape s;
  s.N << 0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0);
  s.dN << xi - 0.5, -2.0 * xi, xi + 0.5;
  return s;
}

namespace {

struct GaussGeometry {
  Q8Shape shape;
  Eigen::Matrix<double, 8, 2> dNdx;
  double weight = 0.0;
  Vec2 x = Vec2::Zero();
};

GaussGeometry gauss_geometry(const std::array<Vec2, 8>& coords, int g) {
  GaussGeometry gg;
  const Vec2 nat = q8_gauss_natural(g);
  gg.shape = q8_shape(nat.x(), nat.y());
  Mat2 J = Mat2::Zero();
  for (int i = 0; i < 8; ++i) {
    J += coords[i] * gg.shape.dN.row(i);
    gg.x += gg.shape.N(i) * coords[i];
  }
  const double det = J.determinant();
  if (!(det > 0.0)) {
    throw MeshError("non-positive Jacobian determinant " + std::to_string(det));
  }
  gg.dNdx = gg.shape.dN * J.inverse();
  gg.weight = det * gauss3()[g / 3].w * gauss3()[g % 3].w;
  return gg;
}

}  // namespace

ElementMatrices bulk_element(const BulkElementInput& in, std::span<BulkPointState> states_new) {
  const int k = static_cast<int>(in.slips.size());
  const int nd = 2 + k;
  const int ne = 8 * nd;
  const Eigen::VectorXd& d = *in.d;
  const Eigen::VectorXd& d0 = *in.d_old;
  const BulkMaterialParams& p = *in.params;
  const Mat3& C = p.elastic.C;

  ElementMatrices out;
  out.f = Eigen::VectorXd::Zero(ne);
  if (in.want_stiffness) out.K = Eigen::MatrixXd::Zero(ne, ne);

  Eigen::MatrixXd E(3, ne), P(k, ne), Q(2 * k, ne);
  std::array<double, kMaxSlips> dg{};
  std::array<Vec2, kMaxSlips> dkap = zero_vec2s<kMaxSlips>(), kap = zero_vec2s<kMaxSlips>();

  for (int g = 0; g < 9; ++g) {
    const GaussGeometry gg = gauss_geometry(*in.coords, g);
    E.setZero();
    P.setZero();
    Q.setZero();
    for (int i = 0; i < 8; ++i) {
      const double Nx = gg.dNdx(i, 0), Ny = gg.dNdx(i, 1);
      E(0, i * nd) = Nx;
      E(1, i * nd + 1) = Ny;
      E(2, i * nd) = Ny;
      E(2, i * nd + 1) = Nx;
      for (int a = 0; a < k; ++a) {
        const int c = i * nd + 2 + a;
        P(a, c) = gg.shape.N(i);
        Q(2 * a, c) = Nx;
        Q(2 * a + 1, c) = Ny;
      }
    }
    for (int a = 0; a < k; ++a) {
      const Voigt T = in.slips[a].schmid_voigt();
      E -= T * P.row(a);
    }

    const Eigen::VectorXd gam = P * d;
    const Eigen::VectorXd dgam = gam - P * d0;
    const Eigen::VectorXd kv = Q * d;
    const Eigen::VectorXd dkv = kv - Q * d0;
    for (int a = 0; a < k; ++a) {
      dg[a] = dgam(a);
      kap[a] = kv.segment<2>(2 * a);
      dkap[a] = dkv.segment<2>(2 * a);
    }

    const Voigt sigma = C * (E * d);

    BulkPointInput pin;
    pin.slips = in.slips;
    pin.dgamma = std::span<const double>(dg.data(), k);
    pin.dkappa = std::span<const Vec2>(dkap.data(), k);
    pin.kappa = std::span<const Vec2>(kap.data(), k);
    pin.dt = in.dt;
    const BulkPointResponse r = update_bulk_point(in.states_old[g], pin, p);
    states_new[g] = r.state;

    Eigen::VectorXd pi(k), xi(2 * k);
    for (int a = 0; a < k; ++a) {
      pi(a) = r.pi[a];
      xi.segment<2>(2 * a) = r.xi[a];
    }
    const double w = gg.weight;
    out.f.noalias() += w * (E.transpose() * sigma + P.transpose() * pi + Q.transpose() * xi);

    if (in.want_stiffness) {
      const Eigen::MatrixXd dpg = r.dpi_dgamma.topLeftCorner(k, k);
      const Eigen::MatrixXd dpk = r.dpi_dkappa.topLeftCorner(k, 2 * k);
      const Eigen::MatrixXd dxg = r.dxi_dgamma.topLeftCorner(2 * k, k);
      const Eigen::MatrixXd dxk = r.dxi_dkappa.topLeftCorner(2 * k, 2 * k);
      out.K.noalias() += w * (E.transpose() * (C * E));
      out.K.noalias() += w * (P.transpose() * (dpg * P + dpk * Q));
      out.K.noalias() += w * (Q.transpose() * (dxg * P + dxk * Q));
    }
  }
  return out;
}

void bulk_gauss_fields(const std::array<Vec2, 8>& coords, std::span<const SlipSystem> slips,
                       const Eigen::VectorXd& d, const ElasticLaw& elastic,
                       std::array<GaussFields, 9>& out) {
  const int k = static_cast<int>(slips.size());
  const int nd = 2 + k;
  for (int g = 0; g < 9; ++g) {
    const GaussGeometry gg = gauss_geometry(coords, g);
    GaussFields& f = out[g];
    f.x = gg.x;
    f.weight = gg.weight;
    Voigt eps = Voigt::Zero();
    for (int i = 0; i < 8; ++i) {
      const double u1 = d(i * nd), u2 = d(i * nd + 1);
      eps(0) += gg.dNdx(i, 0) * u1;
      eps(1) += gg.dNdx(i, 1) * u2;
      eps(2) += gg.dNdx(i, 1) * u1 + gg.dNdx(i, 0) * u2;
    }
    for (int a = 0; a < k; ++a) {
      double gam = 0.0;
      Vec2 kap = Vec2::Zero();
      for (int i = 0; i < 8; ++i) {
        const double v = d(i * nd + 2 + a);
        gam += gg.shape.N(i) * v;
        kap += v * gg.dNdx.row(i).transpose();
      }
      f.gamma[a] = gam;
      f.kappa[a] = kap;
      eps -= gam * slips[a].schmid_voigt();
    }
    f.stress = elastic.stress(eps);
    f.stress33 = elastic.out_of_plane_stress(eps);
  }
}

std::array<double, 3> interface_weights(const std::array<Vec2, 3>& coords) {
  std::array<double, 3> w{};
  for (int g = 0; g < 3; ++g) {
    const LineShape ls = line3_shape(gauss3()[g].x);
    Vec2 t = Vec2::Zero();
    for (int i = 0; i < 3; ++i) t += ls.dN(i) * coords[i];
    const double len = t.norm();
    if (!(len > 0.0)) throw MeshError("degenerate interface element");
    w[g] = len * gauss3()[g].w;
  }
  return w;
}

ElementMatrices interface_element(const InterfaceElementInput& in,
                                  std::span<GbPointState> states_new) {
  const GbOrientation& o = *in.orientation;
  const int k = o.n_slip;
  const int ne = 6 * k;
  const Eigen::VectorXd& gv = *in.g;
  const Eigen::VectorXd& g0 = *in.g_old;
  const std::array<double, 3> wts = interface_weights(*in.coords);

  ElementMatrices out;
  out.f = Eigen::VectorXd::Zero(ne);
  if (in.want_stiffness) out.K = Eigen::MatrixXd::Zero(ne, ne);

  std::array<double, kMaxSlips> dA{}, dB{};
  for (int g = 0; g < 3; ++g) {
    const LineShape ls = line3_shape(gauss3()[g].x);
    for (int a = 0; a < k; ++a) {
      dA[a] = 0.0;
      dB[a] = 0.0;
      for (int i = 0; i < 3; ++i) {
        dA[a] += ls.N(i) * (gv(i * k + a) - g0(i * k + a));
        dB[a] += ls.N(i) * (gv(3 * k + i * k + a) - g0(3 * k + i * k + a));
      }
    }
    const Vec2 dG = gb_burgers_increment(o, std::span<const double>(dA.data(), k),
                                         std::span<const double>(dB.data(), k));
    const GbPointState st = update_gb_stress(in.states_old[g], dG, *in.params);
    states_new[g] = st;
    const double w = wts[g];

    for (int a = 0; a < k; ++a) {
      const double PA = gb_traction(o, st.M, Grain::A, a);
      const double PB = gb_traction(o, st.M, Grain::B, a);
      for (int i = 0; i < 3; ++i) {
        out.f(i * k + a) -= w * ls.N(i) * PA;
        out.f(3 * k + i * k + a) += w * ls.N(i) * PB;
      }
    }
    if (!in.want_stiffness) continue;

    const GbStressTangent t = gb_stress_tangent(st, o, dG, *in.params);
    for (int I = 0; I < 2; ++I) {
      const Grain gi = I == 0 ? Grain::A : Grain::B;
      const double sI = I == 0 ? -1.0 : 1.0;
      for (int a = 0; a < k; ++a) {
        const ReducedSchmid& n = o.N(gi, a);
        for (int J = 0; J < 2; ++J) {
          for (int b = 0; b < k; ++b) {
            const Vec2& dM = J == 0 ? t.dM_dA[b] : t.dM_dB[b];
            const double dPi = dM.dot(n.s) * n.c;
            if (dPi == 0.0) continue;
            for (int i = 0; i < 3; ++i) {
              for (int j = 0; j < 3; ++j) {
                out.K(3 * k * I + i * k + a, 3 * k * J + j * k + b) +=
                    sI * w * ls.N(i) * dPi * ls.N(j);
              }
            }
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ConstraintMap::ConstraintMap(int n_dofs, const Constraints& c)
    : column_(n_dofs, -2), shift_(n_dofs), n_free_(0) {
  std::vector<int> leader(n_dofs, -1);
  std::vector<Prescribed> offset(n_dofs);
  std::vector<char> fixed(n_dofs, 0);
  for (const DirichletBc& bc : c.dirichlet) {
    if (bc.dof < 0 || bc.dof >= n_dofs) throw ConfigError("Dirichlet dof out of range");
    if (fixed[bc.dof]) throw ConfigError("dof " + std::to_string(bc.dof) + " fixed twice");
    fixed[bc.dof] = 1;
    shift_[bc.dof] = bc.value;
  }
  for (const Tie& t : c.ties) {
    if (t.follower < 0 || t.follower >= n_dofs || t.leader < 0 || t.leader >= n_dofs) {
      throw ConfigError("tie dof out of range");
    }
    if (fixed[t.follower] || leader[t.follower] >= 0 || t.follower == t.leader) {
      throw ConfigError("conflicting constraints on dof " + std::to_string(t.follower));
    }
    leader[t.follower] = t.leader;
    offset[t.follower] = t.offset;
  }
  for (int i = 0; i < n_dofs; ++i) {
    if (fixed[i]) {
      column_[i] = -1;
    } else if (leader[i] < 0) {
      column_[i] = n_free_++;
      column_dof_.push_back(i);
    }
  }
  // Resolve follower chains; -3 marks a dof on the current path.
  for (int i = 0; i < n_dofs; ++i) {
    if (column_[i] != -2) continue;
    std::vector<int> path;
    int j = i;
    while (column_[j] == -2) {
      column_[j] = -3;
      path.push_back(j);
      j = leader[j];
      if (column_[j] == -3) throw ConfigError("cyclic ties through dof " + std::to_string(j));
    }
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      const int f = *it;
      const int l = leader[f];
      column_[f] = column_[l];
      shift_[f] = shift_[l] + offset[f];
    }
  }
}

void ConstraintMap::impose(Eigen::VectorXd& d, double load) const {
  for (int i = 0; i < n_dofs(); ++i) {
    const int c = column_[i];
    if (c < 0) {
      d(i) = shift_[i].at(load);
    } else if (column_dof_[c] != i) {
      d(i) = d(column_dof_[c]) + shift_[i].at(load);
    }
  }
}

Eigen::VectorXd ConstraintMap::reduce(const Eigen::VectorXd& full) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n_free_);
  for (int i = 0; i < n_dofs(); ++i) {
    if (column_[i] >= 0) r(column_[i]) += full(i);
  }
  return r;
}

SparseMatrix ConstraintMap::reduce(const std::vector<Triplet>& full) const {
  std::vector<Triplet> red;
  red.reserve(full.size());
  for (const Triplet& t : full) {
    const int r = column_[t.row()], c = column_[t.col()];
    if (r >= 0 && c >= 0) red.emplace_back(r, c, t.value());
  }
  SparseMatrix K(n_free_, n_free_);
  K.setFromTriplets(red.begin(), red.end());
  K.makeCompressed();
  return K;
}

void ConstraintMap::add_increment(Eigen::VectorXd& d, const Eigen::VectorXd& dr) const {
  for (int i = 0; i < n_dofs(); ++i) {
    if (column_[i] >= 0) d(i) += dr(column_[i]);
  }
}

// ---------------------------------------------------------------------------

Assembler::Assembler(const MixedMesh& mesh, std::vector<BulkMaterialParams> params,
                     GbMaterialParams gb)
    : mesh_(mesh), params_(std::move(params)), gb_(gb) {
  mesh_.validate();
  if (params_.size() != mesh_.grains.size()) {
    throw ConfigError("one bulk parameter set per grain required");
  }
  for (auto& p : params_) p.validate();
  gb_.validate();
  coords_.resize(mesh_.elements.size());
  for (std::size_t e = 0; e < mesh_.elements.size(); ++e) {
    for (int i = 0; i < 8; ++i) coords_[e][i] = mesh_.nodes[mesh_.elements[e].nodes[i]];
  }
  icoords_.resize(mesh_.interfaces.size());
  for (std::size_t i = 0; i < mesh_.interfaces.size(); ++i) {
    for (int j = 0; j < 3; ++j) icoords_[i][j] = mesh_.nodes[mesh_.interfaces[i].a_nodes[j]];
    interface_weights(icoords_[i]);  // geometry check
  }
}

StateStore Assembler::virgin_states() const {
  StateStore s;
  s.bulk.reserve(mesh_.elements.size() * 9);
  for (const Q8Element& el : mesh_.elements) {
    const BulkPointState v = BulkPointState::virgin(mesh_.n_slip, params_[el.grain].S0);
    for (int g = 0; g < 9; ++g) s.bulk.push_back(v);
  }
  s.gb.assign(mesh_.interfaces.size() * 3, GbPointState{});
  return s;
}

void Assembler::element_dofs(int e, std::vector<int>& dofs) const {
  const int nd = mesh_.dofs_per_node();
  dofs.resize(8 * nd);
  for (int i = 0; i < 8; ++i) {
    for (int l = 0; l < nd; ++l) dofs[i * nd + l] = mesh_.dof(mesh_.elements[e].nodes[i], l);
  }
}

void Assembler::interface_dofs(int ie, std::vector<int>& dofs) const {
  const int k = mesh_.n_slip;
  const InterfaceElement& el = mesh_.interfaces[ie];
  dofs.resize(6 * k);
  for (int i = 0; i < 3; ++i) {
    for (int a = 0; a < k; ++a) {
      dofs[i * k + a] = mesh_.dof(el.a_nodes[i], 2 + a);
      dofs[3 * k + i * k + a] = mesh_.dof(el.b_nodes[i], 2 + a);
    }
  }
}

void Assembler::assemble(const Eigen::VectorXd& d, const Eigen::VectorXd& d_old,
                         const StateStore& old, StateStore& trial, double dt,
                         bool want_stiffness, AssemblyResult& out) const {
  const int n_el = static_cast<int>(mesh_.elements.size());
  const int n_if = static_cast<int>(mesh_.interfaces.size());
  const int n_tot = n_el + n_if;
  trial.bulk.resize(old.bulk.size());
  trial.gb.resize(old.gb.size());

  std::vector<ElementMatrices> results(n_tot);
  std::exception_ptr failure;

#pragma omp parallel
  {
    std::vector<int> dofs;
    Eigen::VectorXd de, de0;
#pragma omp for schedule(static)
    for (int t = 0; t < n_tot; ++t) {
      try {
        if (t < n_el) {
          element_dofs(t, dofs);
          de.resize(dofs.size());
          de0.resize(dofs.size());
          for (std::size_t j = 0; j < dofs.size(); ++j) {
            de(j) = d(dofs[j]);
            de0(j) = d_old(dofs[j]);
          }
          const Q8Element& el = mesh_.elements[t];
          BulkElementInput in;
          in.coords = &coords_[t];
          in.slips = mesh_.grains[el.grain];
          in.d = &de;
          in.d_old = &de0;
          in.states_old = std::span<const BulkPointState>(old.bulk.data() + 9 * t, 9);
          in.params = &params_[el.grain];
          in.dt = dt;
          in.want_stiffness = want_stiffness;
          results[t] = bulk_element(in, std::span<BulkPointState>(trial.bulk.data() + 9 * t, 9));
        } else {
          const int i = t - n_el;
          interface_dofs(i, dofs);
          de.resize(dofs.size());
          de0.resize(dofs.size());
          for (std::size_t j = 0; j < dofs.size(); ++j) {
            de(j) = d(dofs[j]);
            de0(j) = d_old(dofs[j]);
          }
          InterfaceElementInput in;
          in.coords = &icoords_[i];
          in.orientation = &mesh_.interfaces[i].orientation;
          in.g = &de;
          in.g_old = &de0;
          in.states_old = std::span<const GbPointState>(old.gb.data() + 3 * i, 3);
          in.params = &gb_;
          in.want_stiffness = want_stiffness;
          results[t] =
              interface_element(in, std::span<GbPointState>(trial.gb.data() + 3 * i, 3));
        }
      } catch (...) {
#pragma omp critical(sgcp_assembly_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  // Serial scatter keeps the summation order fixed.
  out.f = Eigen::VectorXd::Zero(mesh_.n_dofs());
  out.triplets.clear();
  if (want_stiffness) {
    std::size_t nnz = 0;
    for (const auto& r : results) nnz += static_cast<std::size_t>(r.K.size());
    out.triplets.reserve(nnz);
  }
  std::vector<int> dofs;
  for (int t = 0; t < n_tot; ++t) {
    if (t < n_el) {
      element_dofs(t, dofs);
    } else {
      interface_dofs(t - n_el, dofs);
    }
    const ElementMatrices& r = results[t];
    const int n = static_cast<int>(dofs.size());
    for (int a = 0; a < n; ++a) out.f(dofs[a]) += r.f(a);
    if (!want_stiffness) continue;
    for (int b = 0; b < n; ++b) {
      for (int a = 0; a < n; ++a) out.triplets.emplace_back(dofs[a], dofs[b], r.K(a, b));
    }
  }
}

}  // namespace sgcp
