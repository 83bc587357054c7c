#include "sgcp/mesh_generation.hpp"

#include "sgcp/errors.hpp"

#include <cmath>
#include <cstdio>

namespace sgcp {

std::vector<int> add_q8_block(MixedMesh& mesh, int nx, int ny, int grain,
                              const std::function<Vec2(double, double)>& map) {
  if (nx < 1 || ny < 1) throw MeshError("grid block needs at least one element per direction");
  const int ci = 2 * nx + 1, cj = 2 * ny + 1;
  std::vector<int> grid(ci * cj, -1);
  for (int j = 0; j < cj; ++j) {
    for (int i = 0; i < ci; ++i) {
      if (i % 2 == 1 && j % 2 == 1) continue;
      grid[grid_index(nx, i, j)] = static_cast<int>(mesh.nodes.size());
      mesh.nodes.push_back(map(static_cast<double>(i) / (ci - 1), static_cast<double>(j) / (cj - 1)));
    }
  }
  for (int ey = 0; ey < ny; ++ey) {
    for (int ex = 0; ex < nx; ++ex) {
      const int i = 2 * ex, j = 2 * ey;
      auto at = [&](int di, int dj) { return grid[grid_index(nx, i + di, j + dj)]; };
      Q8Element el;
      el.nodes = {at(0, 0), at(2, 0), at(2, 2), at(0, 2), at(1, 0), at(2, 1), at(1, 2), at(0, 1)};
      el.grain = grain;
      mesh.elements.push_back(el);
    }
  }
  return grid;
}

namespace {

std::vector<SlipSystem> slip_set(const std::vector<double>& degrees) {
  std::vector<SlipSystem> out;
  for (double d : degrees) out.push_back(build_slip_system(deg_to_rad(d)));
  return out;
}

struct Builder {
  MeshLayout& L;
  ConstraintBuilder cb;
  int k;

  Builder(MeshLayout& layout, int n_dofs, int n_slip) : L(layout), cb(n_dofs), k(n_slip) {}

  int dof(int node, int local) const { return L.mesh.dof(node, local); }

  void fix_all(int node, Prescribed u1 = {}) {
    cb.fix(dof(node, 0), u1);
    cb.fix(dof(node, 1), {});
    for (int a = 0; a < k; ++a) cb.fix(dof(node, 2 + a), {});
  }
  void fix_gamma(int node) {
    for (int a = 0; a < k; ++a) cb.fix(dof(node, 2 + a), {});
  }
  void tie_all(int follower, int leader, Prescribed u1_offset = {}) {
    cb.tie(dof(follower, 0), dof(leader, 0), u1_offset);
    cb.tie(dof(follower, 1), dof(leader, 1));
    for (int a = 0; a < k; ++a) cb.tie(dof(follower, 2 + a), dof(leader, 2 + a));
  }
};

void assign_node_grains(MeshLayout& L, const std::vector<int>& grid, int grain) {
  L.node_grain.resize(L.mesh.nodes.size(), -1);
  for (int n : grid) {
    if (n >= 0) L.node_grain[n] = grain;
  }
}

// Interface elements, displacement ties and GB slip conditions along the
// column iA of block A and column iB of block B.
void join_grains(MeshLayout& L, Builder& b, const CaseConfig& c, const std::vector<int>& gA,
                 int nxA, int iA, const std::vector<int>& gB, int nxB, int iB, int ny,
                 const Vec2& n_s) {
  MixedMesh& m = L.mesh;
  const GbOrientation orient = build_gb_orientation(m.grains[0], m.grains[1], n_s);
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j <= 2 * ny; ++j) {
    pairs.emplace_back(gA[grid_index(nxA, iA, j)], gB[grid_index(nxB, iB, j)]);
  }
  for (const auto& [a, bn] : pairs) {
    L.gb_pairs.emplace_back(a, bn);
    b.cb.tie(b.dof(bn, 0), b.dof(a, 0));
    b.cb.tie(b.dof(bn, 1), b.dof(a, 1));
  }

  // Slip systems untouched by the boundary keep a single unknown.
  std::vector<int> shared;
  if (c.gb.share_parallel_slip) {
    for (int a = 0; a < m.n_slip; ++a) {
      const bool parallel = std::abs(orient.A[a].c) < 1e-12 && std::abs(orient.B[a].c) < 1e-12;
      const bool same = (m.grains[0][a].s - m.grains[1][a].s).norm() < 1e-12;
      if (parallel && same) shared.push_back(a);
    }
  }

  if (c.gb.mode == GbMode::micro_hard) {
    for (const auto& [a, bn] : pairs) {
      b.fix_gamma(a);
      b.fix_gamma(bn);
    }
    return;
  }
  for (int a : shared) {
    for (const auto& [na, nb] : pairs) b.cb.tie(b.dof(nb, 2 + a), b.dof(na, 2 + a));
  }
  if (c.gb.mode == GbMode::micro_free) return;
  for (int e = 0; e < ny; ++e) {
    InterfaceElement ie;
    for (int q = 0; q < 3; ++q) {
      ie.a_nodes[q] = pairs[2 * e + q].first;
      ie.b_nodes[q] = pairs[2 * e + q].second;
    }
    ie.grain_a = 0;
    ie.grain_b = 1;
    ie.orientation = orient;
    m.interfaces.push_back(ie);
  }
}

MeshLayout shear_layer(const CaseConfig& c) {
  MeshLayout L;
  MixedMesh& m = L.mesh;
  m.grains.push_back(slip_set(c.geometry.theta_A));
  m.n_slip = static_cast<int>(m.grains[0].size());
  const int ny = c.geometry.n_el;
  const double H = c.geometry.H;
  const double w = H / ny;
  const auto grid = add_q8_block(m, 1, ny, 0, [&](double s, double t) { return Vec2(s * w, t * H); });
  assign_node_grains(L, grid, 0);

  Builder b(L, m.n_dofs(), m.n_slip);
  auto node = [&](int i, int j) { return grid[grid_index(1, i, j)]; };
  for (int i = 0; i <= 2; ++i) {
    const int bot = node(i, 0), top = node(i, 2 * ny);
    b.cb.fix(b.dof(bot, 0), {});
    b.cb.fix(b.dof(bot, 1), {});
    b.cb.fix(b.dof(top, 0), {0.0, H});
    b.cb.fix(b.dof(top, 1), {});
    for (int a = 0; a < m.n_slip; ++a) {
      if (c.loading.kind == LoadKind::nonproportional) {
        L.switch_dofs.push_back(b.dof(bot, 2 + a));
        L.switch_dofs.push_back(b.dof(top, 2 + a));
      } else if (c.loading.micro_bc == MicroBc::hard) {
        b.cb.fix(b.dof(bot, 2 + a), {});
        b.cb.fix(b.dof(top, 2 + a), {});
      }
    }
  }
  for (int j = 0; j <= 2 * ny; ++j) b.tie_all(node(2, j), node(0, j));
  for (int j = 0; j <= 2 * ny; ++j) L.profile_nodes.push_back(node(0, j));
  m.constraints = b.cb.build();
  return L;
}

MeshLayout bicrystal_shear(const CaseConfig& c) {
  MeshLayout L;
  MixedMesh& m = L.mesh;
  m.grains.push_back(slip_set(c.geometry.theta_A));
  m.grains.push_back(slip_set(c.geometry.theta_B));
  m.n_slip = static_cast<int>(m.grains[0].size());
  const double W = c.geometry.W, H = c.geometry.H;
  const int nA = c.geometry.n_el_grain, nB = nA / 2;

  const auto gL = add_q8_block(m, nB, 1, 1, [&](double s, double t) { return Vec2(s * 0.5 * W, t * H); });
  assign_node_grains(L, gL, 1);
  const auto gA = add_q8_block(m, nA, 1, 0, [&](double s, double t) { return Vec2(0.5 * W + s * W, t * H); });
  assign_node_grains(L, gA, 0);
  const auto gR = add_q8_block(m, nB, 1, 1, [&](double s, double t) { return Vec2(1.5 * W + s * 0.5 * W, t * H); });
  assign_node_grains(L, gR, 1);

  Builder b(L, m.n_dofs(), m.n_slip);
  join_grains(L, b, c, gA, nA, 0, gL, nB, 2 * nB, 1, Vec2(-1.0, 0.0));
  const std::size_t first_junction = L.gb_pairs.size();
  join_grains(L, b, c, gA, nA, 2 * nA, gR, nB, 0, 1, Vec2(1.0, 0.0));
  L.gb_probes = {L.gb_pairs[0], L.gb_pairs[first_junction]};

  // Left-right periodicity joins the two half grains into one.
  for (int j = 0; j <= 2; ++j) b.tie_all(gR[grid_index(nB, 2 * nB, j)], gL[grid_index(nB, 0, j)]);
  // Top-bottom periodicity with the applied shear as offset.
  auto top_bottom = [&](const std::vector<int>& g, int nx) {
    for (int i = 0; i <= 2 * nx; ++i) {
      b.tie_all(g[grid_index(nx, i, 2)], g[grid_index(nx, i, 0)], {0.0, H});
    }
  };
  top_bottom(gL, nB);
  top_bottom(gA, nA);
  top_bottom(gR, nB);
  // Rigid translation.
  const int pin = gA[grid_index(nA, nA, 0)];
  b.cb.fix(b.dof(pin, 0), {});
  b.cb.fix(b.dof(pin, 1), {});

  for (int i = 0; i <= 2 * nB; ++i) L.profile_nodes.push_back(gL[grid_index(nB, i, 0)]);
  for (int i = 0; i <= 2 * nA; ++i) L.profile_nodes.push_back(gA[grid_index(nA, i, 0)]);
  for (int i = 0; i <= 2 * nB; ++i) L.profile_nodes.push_back(gR[grid_index(nB, i, 0)]);
  m.constraints = b.cb.build();
  return L;
}

MeshLayout bicrystal_tension(const CaseConfig& c) {
  MeshLayout L;
  MixedMesh& m = L.mesh;
  m.grains.push_back(slip_set(c.geometry.theta_A));
  m.grains.push_back(slip_set(c.geometry.theta_B));
  m.n_slip = static_cast<int>(m.grains[0].size());
  const double W = c.geometry.W, H = c.geometry.H;
  if (!(H < 2.0 * W)) throw MeshError("bicrystal tension needs H < 2W for the 45 degree boundary");
  const int nx = c.geometry.nx_grain, ny = c.geometry.ny;
  // Boundary from (W + H/2, 0) to (W - H/2, H).
  const double xb = W + 0.5 * H, xt = W - 0.5 * H;
  auto bilinear = [](Vec2 p00, Vec2 p10, Vec2 p11, Vec2 p01) {
    return [=](double s, double t) {
      return Vec2((1 - s) * (1 - t) * p00 + s * (1 - t) * p10 + s * t * p11 + (1 - s) * t * p01);
    };
  };
  const auto gA = add_q8_block(m, nx, ny, 0,
                               bilinear(Vec2(0, 0), Vec2(xb, 0), Vec2(xt, H), Vec2(0, H)));
  assign_node_grains(L, gA, 0);
  const auto gB = add_q8_block(m, nx, ny, 1,
                               bilinear(Vec2(xb, 0), Vec2(2 * W, 0), Vec2(2 * W, H), Vec2(xt, H)));
  assign_node_grains(L, gB, 1);

  Builder b(L, m.n_dofs(), m.n_slip);
  join_grains(L, b, c, gA, nx, 2 * nx, gB, nx, 0, ny, Vec2(1.0, 1.0).normalized());
  L.gb_probes = {{gA[grid_index(nx, 2 * nx, ny)], gB[grid_index(nx, 0, ny)]}};

  for (int j = 0; j <= 2 * ny; ++j) {
    b.fix_all(gA[grid_index(nx, 0, j)]);
    b.fix_all(gB[grid_index(nx, 2 * nx, j)], {0.0, 2.0 * W});
  }
  for (int i = 0; i <= 2 * nx; ++i) L.profile_nodes.push_back(gA[grid_index(nx, i, ny)]);
  for (int i = 0; i <= 2 * nx; ++i) L.profile_nodes.push_back(gB[grid_index(nx, i, ny)]);
  m.constraints = b.cb.build();
  return L;
}

}  // namespace

MeshLayout generate_mesh(const CaseConfig& c) {
  c.validate();
  MeshLayout L;
  switch (c.kind) {
    case CaseKind::shear_layer: L = shear_layer(c); break;
    case CaseKind::bicrystal_shear: L = bicrystal_shear(c); break;
    case CaseKind::bicrystal_tension: L = bicrystal_tension(c); break;
  }
  L.mesh.validate();
  return L;
}

std::string mesh_dump(const MixedMesh& m) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "# nodes %zu elements %zu interfaces %zu slips %d dofs %d\n",
                m.nodes.size(), m.elements.size(), m.interfaces.size(), m.n_slip, m.n_dofs());
  out += buf;
  out += "[nodes] id x1 x2\n";
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", i, m.nodes[i].x(), m.nodes[i].y());
    out += buf;
  }
  out += "[elements] id grain n0 n1 n2 n3 n4 n5 n6 n7\n";
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const auto& el = m.elements[e];
    std::snprintf(buf, sizeof buf, "%zu %d %d %d %d %d %d %d %d %d\n", e, el.grain, el.nodes[0],
                  el.nodes[1], el.nodes[2], el.nodes[3], el.nodes[4], el.nodes[5], el.nodes[6],
                  el.nodes[7]);
    out += buf;
  }
  out += "[interfaces] id a0 a1 a2 b0 b1 b2 n1 n2\n";
  for (std::size_t i = 0; i < m.interfaces.size(); ++i) {
    const auto& ie = m.interfaces[i];
    std::snprintf(buf, sizeof buf, "%zu %d %d %d %d %d %d %.17g %.17g\n", i, ie.a_nodes[0],
                  ie.a_nodes[1], ie.a_nodes[2], ie.b_nodes[0], ie.b_nodes[1], ie.b_nodes[2],
                  ie.orientation.n_s.x(), ie.orientation.n_s.y());
    out += buf;
  }
  out += "[dirichlet] dof constant load_coeff\n";
  for (const auto& d : m.constraints.dirichlet) {
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g\n", d.dof, d.value.constant, d.value.load_coeff);
    out += buf;
  }
  out += "[ties] follower leader constant load_coeff\n";
  for (const auto& t : m.constraints.ties) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", t.follower, t.leader, t.offset.constant,
                  t.offset.load_coeff);
    out += buf;
  }
  return out;
}

}  // namespace sgcp
