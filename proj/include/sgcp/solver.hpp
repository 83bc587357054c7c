#pragma once

// Implicit time marching with a monolithic Newton iteration on (u, gamma).

#include "sgcp/fem.hpp"

#include <Eigen/UmfPackSupport>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace sgcp {

struct SolverConfig {
  double dt_initial = 0.01;
  double t_end = 1.0;
  double newton_tol_rel = 1e-8;
  double newton_tol_abs = 0.0;  // 0 selects 1e-12 * force scale
  int max_newton_iter = 25;
  double dt_min = 1e-8;
  double cutback_factor = 0.5;
  // Start Newton from the last increment scaled by the load-increment ratio.
  bool extrapolate = true;

  void validate() const;
};

/// Piecewise-linear load factor vs time.
class LoadProgram {
 public:
  LoadProgram() = default;
  explicit LoadProgram(std::vector<std::pair<double, double>> points);

  static LoadProgram ramp(double rate, double t_end);
  /// 0 -> +amp -> -amp -> 0 over each period; cycles >= 1.
  static LoadProgram triangle(double amplitude, double period, int cycles);

  double at(double t) const;
  /// Earliest time at which the load reaches `value`, or -1 if it never does.
  double first_time_at(double value) const;
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_{{0.0, 0.0}};
};

/// Mutation applied once the committed time reaches `time`: the listed dofs
/// are frozen at their current values.
struct Event {
  double time = 0.0;
  std::vector<int> freeze_dofs;
  std::string label;
};

struct TimeStepResult {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;
  long snapshot_id = -1;  // committed step the attempt started from
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  double dt = 0.0;
  int iterations = 0;
  int cutbacks = 0;
  std::vector<double> residual_history;
};

/// Direct sparse LU with the symbolic analysis reused while the pattern holds.
class LinearSolver {
 public:
  /// Nested-dissection (METIS) column ordering; cheaper fill on 2D meshes.
  LinearSolver();

  /// Throws SolverError on a singular factorization; dof_names maps columns to labels.
  Eigen::VectorXd solve(const SparseMatrix& A, const Eigen::VectorXd& b,
                        const std::function<std::string(int)>& dof_names = {});
  double last_relative_residual() const { return last_residual_; }

 private:
  Eigen::UmfPackLU<SparseMatrix> lu_;
  std::vector<int> outer_, inner_;
  bool analyzed_ = false;
  double last_residual_ = 0.0;
};

class Simulation {
 public:
  struct StepInfo {
    int step = 0;
    double time = 0.0;
    double dt = 0.0;
    double load = 0.0;
    int iterations = 0;
  };
  using Observer = std::function<void(const Simulation&, const StepInfo&)>;

  Simulation(MixedMesh mesh, std::vector<BulkMaterialParams> params, GbMaterialParams gb,
             LoadProgram program, SolverConfig config, std::vector<Event> events = {});

  /// Advances to t_end; the observer sees the initial state and every committed step.
  /// Steps also land exactly on every time in `breakpoints`.
  void run(const Observer& observer = {}, const std::vector<double>& breakpoints = {});

  /// One Newton solve from the committed state to t_new. Does not commit.
  TimeStepResult newton_solve(double t_new, double dt);
  void commit();
  /// Applies an event immediately; returns the number of newly fixed unknowns.
  int apply_event(const Event& e);

  const MixedMesh& mesh() const { return mesh_; }
  const Assembler& assembler() const { return *assembler_; }
  const ConstraintMap& constraint_map() const { return map_; }
  const Constraints& constraints() const { return constraints_; }
  const SolverConfig& config() const { return config_; }
  const LoadProgram& program() const { return program_; }

  const Eigen::VectorXd& solution() const { return d_; }
  const Eigen::VectorXd& previous_solution() const { return d_prev_; }
  const StateStore& states() const { return states_; }
  const StateStore& previous_states() const { return states_prev_; }
  double time() const { return t_; }
  double load() const { return program_.at(t_); }
  int step() const { return step_; }
  double force_scale() const { return force_scale_; }
  double domain_area() const { return area_; }
  double abs_tolerance() const;
  const std::vector<StepRecord>& report() const { return report_; }

 private:
  std::string describe_column(int col) const;

  MixedMesh mesh_;
  std::unique_ptr<Assembler> assembler_;
  LoadProgram program_;
  SolverConfig config_;
  std::vector<Event> events_;
  std::vector<char> event_done_;
  Constraints constraints_;
  ConstraintMap map_;
  LinearSolver linear_;

  Eigen::VectorXd d_, d_prev_, d_trial_, d_ref_;
  StateStore states_, states_prev_, trial_;
  double t_ = 0.0;
  double t_prev_ = 0.0;
  double t_trial_ = 0.0;
  double dt_trial_ = 0.0;
  int step_ = 0;
  int event_step_ = -1;  // committed step at which the last event fired
  bool trial_ready_ = false;
  double force_scale_ = 1.0;
  double area_ = 0.0;
  std::vector<StepRecord> report_;
  AssemblyResult work_;
  Eigen::VectorXd kd_;
};

}  // namespace sgcp
