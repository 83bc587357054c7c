#pragma once

// Structured meshes and constraint sets for the benchmark cases.

#include "sgcp/config.hpp"
#include "sgcp/mesh.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace sgcp {

struct MeshLayout {
  MixedMesh mesh;
  std::vector<int> node_grain;                // grain id of the block owning each node
  std::vector<int> profile_nodes;             // ordered along the profile line
  std::vector<std::pair<int, int>> gb_pairs;  // every (A node, B node) pair on a boundary
  std::vector<std::pair<int, int>> gb_probes; // pairs where the boundary is sampled
  std::vector<int> switch_dofs;               // dofs frozen by the micro-hard switch
};

/// Q8 grid over a mapped unit square; returns the node index table with
/// (2 nx + 1) columns and (2 ny + 1) rows, -1 at element centres.
std::vector<int> add_q8_block(MixedMesh& mesh, int nx, int ny, int grain,
                              const std::function<Vec2(double, double)>& map);

inline int grid_index(int nx, int i, int j) { return j * (2 * nx + 1) + i; }

/// Mesh, constraints and sampling sets for a case configuration.
MeshLayout generate_mesh(const CaseConfig& c);

/// Plain-text listing of nodes, elements, interfaces and constraints.
std::string mesh_dump(const MixedMesh& mesh);

}  // namespace sgcp
