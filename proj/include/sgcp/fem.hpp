#pragma once

// Element kernels, constraint elimination and global assembly.

#include "sgcp/bulk_material.hpp"
#include "sgcp/gb_material.hpp"
#include "sgcp/mesh.hpp"

#include <Eigen/Sparse>

#include <array>
#include <span>
#include <vector>

namespace sgcp {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// ---------------------------------------------------------------------------
// Shape functions and quadrature

struct Q8Shape {
  Eigen::Matrix<double, 8, 1> N;
  Eigen::Matrix<double, 8, 2> dN;  // d/dxi, d/deta
};

Q8Shape q8_shape(double xi, double eta);

/// Natural coordinates of the Q8 nodes in local order.
const std::array<Vec2, 8>& q8_node_coords();

struct GaussPoint1D {
  double x;
  double w;
};
const std::array<GaussPoint1D, 3>& gauss3();

struct LineShape {
  Eigen::Vector3d N;
  Eigen::Vector3d dN;
};
/// Quadratic Lagrange functions on [-1, 1] with nodes (-1, 0, 1).
LineShape line3_shape(double xi);

// ---------------------------------------------------------------------------
// Bulk element

struct ElementMatrices {
  Eigen::VectorXd f;
  Eigen::MatrixXd K;
};

/// Element dofs are node-major: [u1, u2, gamma^1..gamma^k] per node.
struct BulkElementInput {
  const std::array<Vec2, 8>* coords = nullptr;
  std::span<const SlipSystem> slips;
  const Eigen::VectorXd* d = nullptr;      // nodal values at the end of the step
  const Eigen::VectorXd* d_old = nullptr;  // nodal values at the start of the step
  std::span<const BulkPointState> states_old;  // 9 Gauss points
  const BulkMaterialParams* params = nullptr;
  double dt = 0.0;
  bool want_stiffness = true;
};

/// Fills new Gauss states. Throws MeshError on a non-positive Jacobian.
ElementMatrices bulk_element(const BulkElementInput& in, std::span<BulkPointState> states_new);

/// Quantities at one bulk Gauss point, evaluated from nodal values.
struct GaussFields {
  Vec2 x = Vec2::Zero();
  double weight = 0.0;  // detJ * w
  Voigt stress = Voigt::Zero();
  double stress33 = 0.0;
  std::array<double, kMaxSlips> gamma{};
  std::array<Vec2, kMaxSlips> kappa = zero_vec2s<kMaxSlips>();
};

void bulk_gauss_fields(const std::array<Vec2, 8>& coords, std::span<const SlipSystem> slips,
                       const Eigen::VectorXd& d, const ElasticLaw& elastic,
                       std::array<GaussFields, 9>& out);

/// Gauss point order: index gi * 3 + gj with xi = gauss3()[gi], eta = gauss3()[gj].
inline Vec2 q8_gauss_natural(int g) {
  return {gauss3()[g / 3].x, gauss3()[g % 3].x};
}

// ---------------------------------------------------------------------------
// Interface element

/// Element dofs: gamma of the three A nodes (node-major), then the three B nodes.
struct InterfaceElementInput {
  const std::array<Vec2, 3>* coords = nullptr;  // A-side nodes
  const GbOrientation* orientation = nullptr;
  const Eigen::VectorXd* g = nullptr;      // 6k nodal slips at the end of the step
  const Eigen::VectorXd* g_old = nullptr;  // 6k nodal slips at the start
  std::span<const GbPointState> states_old;  // 3 Gauss points
  const GbMaterialParams* params = nullptr;
  bool want_stiffness = true;
};

ElementMatrices interface_element(const InterfaceElementInput& in,
                                  std::span<GbPointState> states_new);

/// Length weight (|dx/dxi| * w) at each interface Gauss point.
std::array<double, 3> interface_weights(const std::array<Vec2, 3>& coords);

// ---------------------------------------------------------------------------
// Constraint elimination

/// Full dofs expressed through reduced unknowns: d = T d_r + g(load).
class ConstraintMap {
 public:
  ConstraintMap() = default;
  /// Throws ConfigError on cycles or dofs that are both fixed and tied.
  ConstraintMap(int n_dofs, const Constraints& c);

  int n_dofs() const { return static_cast<int>(column_.size()); }
  int n_free() const { return n_free_; }
  /// Reduced column of a dof, or -1 if its value is fully prescribed.
  int column(int dof) const { return column_[dof]; }
  /// Value added to the reduced unknown (or the full value when column == -1).
  const Prescribed& shift(int dof) const { return shift_[dof]; }
  /// Dof carrying the reduced unknown of a column.
  int column_dof(int col) const { return column_dof_[col]; }

  /// Overwrites constrained entries of d so every constraint holds at load.
  void impose(Eigen::VectorXd& d, double load) const;
  Eigen::VectorXd reduce(const Eigen::VectorXd& full) const;
  SparseMatrix reduce(const std::vector<Triplet>& full) const;
  void add_increment(Eigen::VectorXd& d, const Eigen::VectorXd& dr) const;

 private:
  std::vector<int> column_;
  std::vector<Prescribed> shift_;
  std::vector<int> column_dof_;
  int n_free_ = 0;
};

// ---------------------------------------------------------------------------
// Global assembly

struct StateStore {
  std::vector<BulkPointState> bulk;  // element * 9 + gauss
  std::vector<GbPointState> gb;      // interface * 3 + gauss
};

struct AssemblyResult {
  Eigen::VectorXd f;             // internal force, full dof space
  std::vector<Triplet> triplets;  // stiffness, full dof space
};

class Assembler {
 public:
  /// params has one entry per grain id.
  Assembler(const MixedMesh& mesh, std::vector<BulkMaterialParams> params, GbMaterialParams gb);

  StateStore virgin_states() const;

  void assemble(const Eigen::VectorXd& d, const Eigen::VectorXd& d_old, const StateStore& old,
                StateStore& trial, double dt, bool want_stiffness, AssemblyResult& out) const;

  /// Element dof indices in the global numbering.
  void element_dofs(int e, std::vector<int>& dofs) const;
  void interface_dofs(int i, std::vector<int>& dofs) const;

  const MixedMesh& mesh() const { return mesh_; }
  const BulkMaterialParams& params(int grain) const { return params_[grain]; }
  const GbMaterialParams& gb_params() const { return gb_; }

 private:
  const MixedMesh& mesh_;
  std::vector<BulkMaterialParams> params_;
  GbMaterialParams gb_;
  std::vector<std::array<Vec2, 8>> coords_;
  std::vector<std::array<Vec2, 3>> icoords_;
};

}  // namespace sgcp
