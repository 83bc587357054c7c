#include "sgcp/mesh.hpp"

#include "sgcp/errors.hpp"

#include <cmath>
#include <map>
#include <string>

namespace sgcp {

bool Prescribed::near(const Prescribed& o, double tol) const {
  auto close = [tol](double a, double b) {
    return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
  };
  return close(constant, o.constant) && close(load_coeff, o.load_coeff);
}

void MixedMesh::validate() const {
  const int nn = static_cast<int>(nodes.size());
  if (n_slip < 1 || n_slip > kMaxSlips) throw MeshError("slip systems per node out of range");
  for (std::size_t g = 0; g < grains.size(); ++g) {
    if (static_cast<int>(grains[g].size()) != n_slip) {
      throw MeshError("grain " + std::to_string(g) + " has the wrong number of slip systems");
    }
  }
  for (std::size_t e = 0; e < elements.size(); ++e) {
    for (int n : elements[e].nodes) {
      if (n < 0 || n >= nn) throw MeshError("element " + std::to_string(e) + ": node out of range");
    }
    if (elements[e].grain < 0 || elements[e].grain >= static_cast<int>(grains.size())) {
      throw MeshError("element " + std::to_string(e) + ": unknown grain");
    }
  }
  for (std::size_t i = 0; i < interfaces.size(); ++i) {
    const InterfaceElement& ie = interfaces[i];
    for (int j = 0; j < 3; ++j) {
      const int a = ie.a_nodes[j], b = ie.b_nodes[j];
      if (a < 0 || a >= nn || b < 0 || b >= nn) {
        throw MeshError("interface " + std::to_string(i) + ": node out of range");
      }
      if ((nodes[a] - nodes[b]).norm() > 1e-10) {
        throw MeshError("interface " + std::to_string(i) + ": node pair does not coincide");
      }
    }
  }

  const int nd = n_dofs();
  std::vector<char> kind(nd, 0);  // 1 Dirichlet, 2 follower
  for (const DirichletBc& bc : constraints.dirichlet) {
    if (bc.dof < 0 || bc.dof >= nd) throw MeshError("Dirichlet dof out of range");
    if (kind[bc.dof] != 0) throw MeshError("dof " + std::to_string(bc.dof) + " fixed twice");
    kind[bc.dof] = 1;
  }
  for (const Tie& t : constraints.ties) {
    if (t.follower < 0 || t.follower >= nd || t.leader < 0 || t.leader >= nd) {
      throw MeshError("tie dof out of range");
    }
    if (t.follower == t.leader) throw MeshError("dof tied to itself");
    if (kind[t.follower] == 1) {
      throw MeshError("dof " + std::to_string(t.follower) + " is both Dirichlet and follower");
    }
    if (kind[t.follower] == 2) {
      throw MeshError("dof " + std::to_string(t.follower) + " follows more than one leader");
    }
    kind[t.follower] = 2;
  }
}

ConstraintBuilder::ConstraintBuilder(int n_dofs) : n_dofs_(n_dofs) {}

void ConstraintBuilder::fix(int dof, Prescribed value) {
  if (dof < 0 || dof >= n_dofs_) throw ConfigError("constraint dof out of range");
  fixes_.push_back({dof, value});
}

void ConstraintBuilder::tie(int follower, int leader, Prescribed offset) {
  if (follower < 0 || follower >= n_dofs_ || leader < 0 || leader >= n_dofs_) {
    throw ConfigError("constraint dof out of range");
  }
  ties_.push_back({follower, leader, offset});
}

namespace {

// Union-find with affine offsets: u[i] = u[parent[i]] + off[i].
struct OffsetForest {
  std::vector<int> parent;
  std::vector<Prescribed> off;

  explicit OffsetForest(int n) : parent(n), off(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }

  int find(int i, Prescribed& acc) {
    // Iterative with path compression onto the root.
    std::vector<int> path;
    int r = i;
    while (parent[r] != r) {
      path.push_back(r);
      r = parent[r];
    }
    Prescribed sum;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      sum = sum + off[*it];
      off[*it] = sum;
      parent[*it] = r;
    }
    acc = path.empty() ? Prescribed{} : off[i];
    return r;
  }
};

constexpr double kTol = 1e-12;

}  // namespace

Constraints ConstraintBuilder::build() const {
  OffsetForest forest(n_dofs_);
  for (const Tie& t : ties_) {
    Prescribed of, ol;
    const int rf = forest.find(t.follower, of);
    const int rl = forest.find(t.leader, ol);
    if (rf == rl) {
      if (!of.near(ol + t.offset, kTol)) {
        throw ConfigError("conflicting periodic ties on dof " + std::to_string(t.follower));
      }
      continue;
    }
    forest.parent[rf] = rl;
    forest.off[rf] = ol + t.offset - of;
  }

  std::map<int, Prescribed> fixed;
  for (const DirichletBc& bc : fixes_) {
    auto [it, inserted] = fixed.emplace(bc.dof, bc.value);
    if (!inserted && !it->second.near(bc.value, kTol)) {
      throw ConfigError("dof " + std::to_string(bc.dof) + " fixed to two different values");
    }
  }

  // Per root: the first fixed member, which becomes the group leader.
  std::vector<int> root_fixed(n_dofs_, -1);
  std::vector<Prescribed> offset(n_dofs_);
  std::vector<int> root(n_dofs_);
  for (int i = 0; i < n_dofs_; ++i) root[i] = forest.find(i, offset[i]);

  Constraints out;
  for (const auto& [dof, value] : fixed) {
    const int r = root[dof];
    if (root_fixed[r] < 0) {
      root_fixed[r] = dof;
    } else {
      // Both fixed: values must agree with the tie offsets.
      const int f0 = root_fixed[r];
      const Prescribed implied = fixed.at(f0) - offset[f0] + offset[dof];
      if (!implied.near(value, kTol)) {
        throw ConfigError("Dirichlet values on dofs " + std::to_string(f0) + " and " +
                          std::to_string(dof) + " contradict a tie");
      }
    }
    out.dirichlet.push_back({dof, value});
  }
  for (int i = 0; i < n_dofs_; ++i) {
    if (fixed.count(i)) continue;
    const int r = root[i];
    if (root_fixed[r] >= 0) {
      const int f0 = root_fixed[r];
      out.ties.push_back({i, f0, offset[i] - offset[f0]});
    } else if (r != i) {
      out.ties.push_back({i, r, offset[i]});
    }
  }
  return out;
}

}  // namespace sgcp
