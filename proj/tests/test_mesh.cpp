#include "sgcp/errors.hpp"
#include "sgcp/fem.hpp"
#include "sgcp/mesh_generation.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace sgcp;

namespace {

int block_nodes(int nx, int ny) { return (2 * nx + 1) * (2 * ny + 1) - nx * ny; }

int free_unknowns(const MixedMesh& m) { return ConstraintMap(m.n_dofs(), m.constraints).n_free(); }

}  // namespace

TEST_CASE("single element grid") {
  MixedMesh m;
  const auto grid = add_q8_block(m, 1, 1, 0, [](double s, double t) { return Vec2(s, t); });
  CHECK(m.nodes.size() == 8);
  CHECK(m.elements.size() == 1);
  CHECK(grid[grid_index(1, 1, 1)] == -1);
  CHECK(m.nodes[m.elements[0].nodes[2]] == Vec2(1, 1));
  CHECK(m.nodes[m.elements[0].nodes[5]] == Vec2(1, 0.5));
  MixedMesh none;
  CHECK_THROWS_AS(add_q8_block(none, 0, 1, 0, [](double s, double t) { return Vec2(s, t); }), MeshError);
}

TEST_CASE("grid counts follow the serendipity rule") {
  for (auto [nx, ny] : {std::pair{1, 1}, {2, 3}, {7, 4}, {45, 40}}) {
    MixedMesh m;
    add_q8_block(m, nx, ny, 0, [](double s, double t) { return Vec2(s, t); });
    CHECK(static_cast<int>(m.nodes.size()) == block_nodes(nx, ny));
    CHECK(static_cast<int>(m.elements.size()) == nx * ny);
  }
}

TEST_CASE("shear layer mesh and constraint counts") {
  for (int n : {1, 5, 100}) {
    for (MicroBc bc : {MicroBc::hard, MicroBc::free}) {
      CaseConfig c = CaseConfig::defaults(CaseKind::shear_layer);
      c.geometry.n_el = n;
      c.loading.micro_bc = bc;
      const MeshLayout L = generate_mesh(c);
      const MixedMesh& m = L.mesh;
      CHECK(static_cast<int>(m.elements.size()) == n);
      CHECK(static_cast<int>(m.nodes.size()) == 3 * (2 * n + 1) - n);
      CHECK(m.interfaces.empty());
      CHECK(m.n_dofs() == 4 * static_cast<int>(m.nodes.size()));
      // Three nodes per edge; micro-hard also fixes both slips there.
      const int dir = bc == MicroBc::hard ? 24 : 12;
      // Lateral ties on every row; rows whose dofs are already fixed drop out.
      const int ties = bc == MicroBc::hard ? 4 * (2 * n - 1) : 8 * n;
      CHECK(static_cast<int>(m.constraints.dirichlet.size()) == dir);
      CHECK(static_cast<int>(m.constraints.ties.size()) == ties);
      CHECK(free_unknowns(m) == m.n_dofs() - dir - ties);
      CHECK(static_cast<int>(L.profile_nodes.size()) == 2 * n + 1);
    }
  }
  CaseConfig c = CaseConfig::defaults(CaseKind::shear_layer);
  c.loading.kind = LoadKind::nonproportional;
  const MeshLayout L = generate_mesh(c);
  CHECK(L.switch_dofs.size() == 12);
  CHECK(L.mesh.constraints.dirichlet.size() == 12);
}

TEST_CASE("bicrystal shear mesh") {
  const CaseConfig c = CaseConfig::defaults(CaseKind::bicrystal_shear);
  const MeshLayout L = generate_mesh(c);
  const MixedMesh& m = L.mesh;
  const int nA = c.geometry.n_el_grain, nB = nA / 2;
  CHECK(static_cast<int>(m.elements.size()) == nA + 2 * nB);
  CHECK(static_cast<int>(m.nodes.size()) == block_nodes(nA, 1) + 2 * block_nodes(nB, 1));
  REQUIRE(m.interfaces.size() == 2);
  std::set<double> columns;
  for (const auto& ie : m.interfaces) {
    for (int q = 0; q < 3; ++q) {
      CHECK(m.nodes[ie.a_nodes[q]] == m.nodes[ie.b_nodes[q]]);
      CHECK(ie.a_nodes[q] != ie.b_nodes[q]);
      columns.insert(m.nodes[ie.a_nodes[q]].x());
    }
  }
  CHECK(columns == std::set<double>{0.5 * c.geometry.W, 1.5 * c.geometry.W});
  CHECK(L.gb_pairs.size() == 6);
  CHECK(L.gb_probes.size() == 2);
  int a_elems = 0;
  for (const auto& el : m.elements) a_elems += el.grain == 0;
  CHECK(a_elems == nA);
  // Only the pinned node is fixed; everything else is periodic.
  CHECK(m.constraints.dirichlet.size() == 2);

  CaseConfig h = c;
  h.gb.mode = GbMode::micro_hard;
  const MeshLayout Lh = generate_mesh(h);
  CHECK(Lh.mesh.interfaces.empty());
  CaseConfig f = c;
  f.gb.mode = GbMode::micro_free;
  CHECK(generate_mesh(f).mesh.interfaces.empty());
}

TEST_CASE("bicrystal tension mesh") {
  const CaseConfig c = CaseConfig::defaults(CaseKind::bicrystal_tension);
  const MeshLayout L = generate_mesh(c);
  const MixedMesh& m = L.mesh;
  const int nx = c.geometry.nx_grain, ny = c.geometry.ny;
  CHECK(m.elements.size() == 3600);
  CHECK(static_cast<int>(m.nodes.size()) == 2 * block_nodes(nx, ny));
  CHECK(static_cast<int>(m.interfaces.size()) == ny);
  const double W = c.geometry.W, H = c.geometry.H;
  for (const auto& ie : m.interfaces) {
    CHECK(ie.orientation.n_s.isApprox(Vec2(1, 1).normalized()));
    for (int q = 0; q < 3; ++q) {
      const Vec2 x = m.nodes[ie.a_nodes[q]];
      CHECK(std::abs(x.x() + x.y() - (W + 0.5 * H)) < 1e-14);
    }
  }
  // Left and right edges fix every dof.
  CHECK(static_cast<int>(m.constraints.dirichlet.size()) == 2 * (2 * ny + 1) * 4);
  // The boundary-parallel system shares its unknown; displacements are tied.
  CHECK(static_cast<int>(m.constraints.ties.size()) == (2 * ny + 1) * 3);
  double xmax = 0.0;
  for (const Vec2& x : m.nodes) xmax = std::max(xmax, x.x());
  CHECK(xmax == doctest::Approx(2.0 * W));

  CaseConfig bad = c;
  bad.geometry.H = 2.0 * bad.geometry.W;
  CHECK_THROWS_AS(generate_mesh(bad), MeshError);
}

TEST_CASE("mesh dump lists every entity") {
  CaseConfig c = CaseConfig::defaults(CaseKind::shear_layer);
  c.geometry.n_el = 3;
  const MixedMesh m = generate_mesh(c).mesh;
  const std::string dump = mesh_dump(m);
  std::istringstream in(dump);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# nodes 18 elements 3 interfaces 0 slips 2 dofs 72");
  std::map<std::string, int> count;
  std::string section;
  while (std::getline(in, line)) {
    if (line[0] == '[') {
      section = line.substr(0, line.find(']') + 1);
    } else {
      ++count[section];
    }
  }
  CHECK(count["[nodes]"] == 18);
  CHECK(count["[elements]"] == 3);
  CHECK(count["[interfaces]"] == 0);
  CHECK(count["[dirichlet]"] == static_cast<int>(m.constraints.dirichlet.size()));
  CHECK(count["[ties]"] == static_cast<int>(m.constraints.ties.size()));
  CHECK(dump.find('\r') == std::string::npos);
}

TEST_CASE("mesh invariants are validated") {
  MixedMesh m;
  m.grains = {{build_slip_system(0.0)}};
  add_q8_block(m, 1, 1, 0, [](double s, double t) { return Vec2(s, t); });
  CHECK_NOTHROW(m.validate());
  MixedMesh bad = m;
  bad.elements[0].nodes[3] = 99;
  CHECK_THROWS_AS(bad.validate(), MeshError);
  MixedMesh grain = m;
  grain.elements[0].grain = 4;
  CHECK_THROWS_AS(grain.validate(), MeshError);
}
