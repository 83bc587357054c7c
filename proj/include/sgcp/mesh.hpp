#pragma once

// Mixed mesh: Q8 bulk elements carrying (u1, u2, gamma^1..gamma^k) per node,
// zero-thickness 6-node grain-boundary elements and the constraint sets.
//
// Q8 local node order is corner-first, counter-clockwise:
//   3---6---2
//   |       |
//   7       5
//   |       |
//   0---4---1

#include "sgcp/gb_material.hpp"
#include "sgcp/kinematics.hpp"

#include <array>
#include <vector>

namespace sgcp {

/// Value that depends affinely on the load factor: constant + load_coeff * load.
struct Prescribed {
  double constant = 0.0;
  double load_coeff = 0.0;

  double at(double load) const { return constant + load_coeff * load; }
  Prescribed operator+(const Prescribed& o) const {
    return {constant + o.constant, load_coeff + o.load_coeff};
  }
  Prescribed operator-(const Prescribed& o) const {
    return {constant - o.constant, load_coeff - o.load_coeff};
  }
  bool operator==(const Prescribed&) const = default;
  bool near(const Prescribed& o, double tol) const;
};

struct DirichletBc {
  int dof = -1;
  Prescribed value;
};

/// u[follower] = u[leader] + offset
struct Tie {
  int follower = -1;
  int leader = -1;
  Prescribed offset;
};

struct Constraints {
  std::vector<DirichletBc> dirichlet;
  std::vector<Tie> ties;
};

struct Q8Element {
  std::array<int, 8> nodes{};
  int grain = 0;
};

/// Three A-side and three B-side nodes, ordered along the boundary line
/// (end, middle, end). A-side and B-side nodes coincide pairwise.
struct InterfaceElement {
  std::array<int, 3> a_nodes{};
  std::array<int, 3> b_nodes{};
  int grain_a = 0;
  int grain_b = 1;
  GbOrientation orientation;
};

struct MixedMesh {
  int n_slip = 1;
  std::vector<Vec2> nodes;
  std::vector<Q8Element> elements;
  std::vector<InterfaceElement> interfaces;
  std::vector<std::vector<SlipSystem>> grains;  // slip systems per grain id
  Constraints constraints;

  int dofs_per_node() const { return 2 + n_slip; }
  int n_dofs() const { return static_cast<int>(nodes.size()) * dofs_per_node(); }
  /// local: 0, 1 for u, 2 + alpha for gamma^alpha
  int dof(int node, int local) const { return node * dofs_per_node() + local; }

  /// Throws MeshError on broken invariants.
  void validate() const;
};

/// Collects raw Dirichlet rows and affine ties, then resolves them into a
/// canonical set: every follower has one leader, no chains, no follower is
/// Dirichlet. Tied groups containing a Dirichlet dof follow that dof.
class ConstraintBuilder {
 public:
  explicit ConstraintBuilder(int n_dofs);

  void fix(int dof, Prescribed value);
  void tie(int follower, int leader, Prescribed offset = {});

  /// Throws ConfigError on inconsistent constraints.
  Constraints build() const;

 private:
  int n_dofs_;
  std::vector<DirichletBc> fixes_;
  std::vector<Tie> ties_;
};

}  // namespace sgcp
