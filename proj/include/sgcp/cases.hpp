#pragma once

// Benchmark scenarios: build, run and post-process.

#include "sgcp/config.hpp"
#include "sgcp/mesh_generation.hpp"
#include "sgcp/output.hpp"
#include "sgcp/solver.hpp"

#include <memory>
#include <string>
#include <vector>

namespace sgcp {

struct CaseOutputs {
  std::vector<OutputSeries> series;
  std::vector<StepRecord> convergence;
  // Smallest dissipation increment seen at any quadrature point of any step.
  double min_bulk_dissipation_increment = 0.0;
  double min_gb_dissipation_increment = 0.0;
  int steps = 0;
  int n_dofs = 0;
  int n_unknowns = 0;
  double wall_seconds = 0.0;

  /// Throws IoError if absent.
  const OutputSeries& get(const std::string& name) const;
};

/// Simulation ready to run, with the layout it was built from.
struct CaseSetup {
  MeshLayout layout;
  std::unique_ptr<Simulation> sim;
  std::vector<double> profile_times;
  std::vector<double> field_times;
};

LoadProgram load_program(const CaseConfig& c);
CaseSetup build_case(const CaseConfig& c);

/// Dispatches on c.kind.
CaseOutputs run_case(const CaseConfig& c);
/// Each throws ConfigError if c.kind does not match.
CaseOutputs run_shear_layer(const CaseConfig& c);
CaseOutputs run_bicrystal_shear(const CaseConfig& c);
CaseOutputs run_bicrystal_tension(const CaseConfig& c);

/// CSV series, the resolved configuration (config.ini) and manifest.json.
void write_case_outputs(const CaseConfig& c, const CaseOutputs& out, const std::string& dir);

std::string code_version();

struct SweepPoint {
  std::string value;
  CaseConfig config;
  CaseOutputs outputs;
};

/// Runs the case once per value of the "section.key" parameter.
std::vector<SweepPoint> run_sweep(const CaseConfig& base, const std::string& param,
                                  const std::vector<std::string>& values);
/// One row per point with the final values of the stress and average series.
OutputSeries sweep_summary(const std::vector<SweepPoint>& points);

// ---------------------------------------------------------------------------
// Post-processing

struct DomainAverages {
  double area = 0.0;
  Voigt stress = Voigt::Zero();
  double D = 0.0;       // accumulated bulk dissipation
  double Dh = 0.0;      // its higher-order part
  double D_inc = 0.0;   // last step
  double Dh_inc = 0.0;
  double psi = 0.0;     // defect energy
  // Boundary quantities are integrals over the GB length, not averages.
  double D_gb = 0.0;
  double D_gb_inc = 0.0;
  double psi_gb = 0.0;
  double min_D_inc = 0.0;
  double min_D_gb_inc = 0.0;
};

/// Quadrature-weighted averages over the bulk and integrals over the GBs.
DomainAverages domain_averages(const Assembler& assembler, const Eigen::VectorXd& d,
                               const StateStore& states);

/// Nodal values from per-Gauss-point element values: element-wise least
/// squares fit of the Q8 field, then the mean over elements sharing a node.
std::vector<double> project_to_nodes(const MixedMesh& mesh,
                                     const std::vector<std::array<double, 9>>& gauss);

/// Gradient of a nodal dof field at every node, averaged over adjacent elements.
std::vector<Vec2> nodal_gradient(const MixedMesh& mesh, const Eigen::VectorXd& d, int local_dof);

/// Nodal edge GND density -s.kappa of slip system a.
std::vector<double> nodal_gnd_density(const MixedMesh& mesh, const Eigen::VectorXd& d, int a);

}  // namespace sgcp
