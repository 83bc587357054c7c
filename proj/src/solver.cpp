#include "sgcp/solver.hpp"

#include "sgcp/errors.hpp"
#include "sgcp/logging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

namespace sgcp {

void SolverConfig::validate() const {
  if (!(dt_initial > 0.0)) throw ConfigError("solver: dt_initial must be > 0");
  if (!(t_end >= 0.0)) throw ConfigError("solver: t_end must be >= 0");
  if (!(newton_tol_rel > 0.0)) throw ConfigError("solver: newton_tol_rel must be > 0");
  if (!(newton_tol_abs >= 0.0)) throw ConfigError("solver: newton_tol_abs must be >= 0");
  if (max_newton_iter < 1) throw ConfigError("solver: max_newton_iter must be >= 1");
  if (!(dt_min > 0.0) || dt_min > dt_initial) {
    throw ConfigError("solver: dt_min must satisfy 0 < dt_min <= dt_initial");
  }
  if (!(cutback_factor > 0.0 && cutback_factor < 1.0)) {
    throw ConfigError("solver: cutback_factor must lie in (0, 1)");
  }
}

// ---------------------------------------------------------------------------

LoadProgram::LoadProgram(std::vector<std::pair<double, double>> points)
    : points_(std::move(points)) {
  if (points_.empty()) throw ConfigError("load program needs at least one point");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].first > points_[i - 1].first)) {
      throw ConfigError("load program times must increase");
    }
  }
}

LoadProgram LoadProgram::ramp(double rate, double t_end) {
  if (!(t_end > 0.0)) return LoadProgram({{0.0, 0.0}});
  return LoadProgram({{0.0, 0.0}, {t_end, rate * t_end}});
}

LoadProgram LoadProgram::triangle(double amplitude, double period, int cycles) {
  if (!(period > 0.0) || cycles < 1) throw ConfigError("cyclic load needs period > 0, cycles >= 1");
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  for (int c = 0; c < cycles; ++c) {
    const double t0 = c * period;
    pts.emplace_back(t0 + 0.25 * period, amplitude);
    pts.emplace_back(t0 + 0.75 * period, -amplitude);
    pts.emplace_back(t0 + period, 0.0);
  }
  return LoadProgram(std::move(pts));
}

double LoadProgram::at(double t) const {
  if (t <= points_.front().first) return points_.front().second;
  if (t >= points_.back().first) return points_.back().second;
  const auto it = std::upper_bound(points_.begin(), points_.end(), t,
                                   [](double v, const auto& p) { return v < p.first; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double s = (t - a.first) / (b.first - a.first);
  return a.second + s * (b.second - a.second);
}

double LoadProgram::first_time_at(double value) const {
  if (points_.front().second == value) return points_.front().first;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const auto& [t0, v0] = points_[i - 1];
    const auto& [t1, v1] = points_[i];
    if ((v0 - value) * (v1 - value) <= 0.0 && v0 != v1) {
      return t0 + (value - v0) / (v1 - v0) * (t1 - t0);
    }
  }
  return -1.0;
}

// ---------------------------------------------------------------------------

LinearSolver::LinearSolver() { lu_.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS; }

Eigen::VectorXd LinearSolver::solve(const SparseMatrix& A, const Eigen::VectorXd& b,
                                    const std::function<std::string(int)>& dof_names) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw SolverError("linear solve: dimension mismatch");
  }
  if (A.rows() == 0) return Eigen::VectorXd();
  const int n = static_cast<int>(A.cols());
  const bool same = analyzed_ && static_cast<int>(outer_.size()) == n + 1 &&
                    std::equal(outer_.begin(), outer_.end(), A.outerIndexPtr()) &&
                    static_cast<int>(inner_.size()) == A.nonZeros() &&
                    std::equal(inner_.begin(), inner_.end(), A.innerIndexPtr());
  if (!same) {
    lu_.analyzePattern(A);
    outer_.assign(A.outerIndexPtr(), A.outerIndexPtr() + n + 1);
    inner_.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
    analyzed_ = lu_.info() == Eigen::Success;
  }
  lu_.factorize(A);
  bool ok = lu_.info() == Eigen::Success;
  Eigen::VectorXd x;
  if (ok) {
    x = lu_.solve(b);
    ok = lu_.info() == Eigen::Success && x.allFinite();
    // UMFPACK reports a singular matrix through rcond = 0 rather than failure.
    if (ok && lu_.umfpackFactorizeReturncode() == UMFPACK_WARNING_singular_matrix) ok = false;
  }
  if (!ok) {
    std::string msg = "singular system matrix";
    int listed = 0;
    for (int c = 0; c < n && listed < 8; ++c) {
      double colmax = 0.0;
      for (SparseMatrix::InnerIterator it(A, c); it; ++it) colmax = std::max(colmax, std::abs(it.value()));
      if (colmax == 0.0) {
        msg += listed == 0 ? "; empty columns: " : ", ";
        msg += dof_names ? dof_names(c) : std::to_string(c);
        ++listed;
      }
    }
    if (listed == 0) msg += " (no empty column; check for unconstrained rigid modes)";
    throw SolverError(msg);
  }
  // One refinement pass keeps the residual at round-off level for stiff penalties.
  const double bn = std::max(b.norm(), std::numeric_limits<double>::min());
  Eigen::VectorXd r = b - A * x;
  for (int it = 0; it < 1 && r.norm() > 1e-12 * bn; ++it) {
    x += lu_.solve(r);
    r = b - A * x;
  }
  last_residual_ = r.norm() / bn;
  if (!x.allFinite()) throw SolverError("linear solve produced non-finite values");
  return x;
}

// ---------------------------------------------------------------------------

Simulation::Simulation(MixedMesh mesh, std::vector<BulkMaterialParams> params,
                       GbMaterialParams gb, LoadProgram program, SolverConfig config,
                       std::vector<Event> events)
    : mesh_(std::move(mesh)),
      program_(std::move(program)),
      config_(config),
      events_(std::move(events)) {
  config_.validate();
  assembler_ = std::make_unique<Assembler>(mesh_, std::move(params), gb);
  constraints_ = mesh_.constraints;
  map_ = ConstraintMap(mesh_.n_dofs(), constraints_);
  if (map_.n_free() == 0) {
    throw SolverError("every degree of freedom is constrained; the reduced system is empty");
  }
  std::stable_sort(events_.begin(), events_.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  event_done_.assign(events_.size(), 0);

  d_ = Eigen::VectorXd::Zero(mesh_.n_dofs());
  map_.impose(d_, program_.at(0.0));
  d_prev_ = d_;
  states_ = assembler_->virgin_states();
  states_prev_ = states_;

  // Force scale: largest S0 times domain area.
  std::array<GaussFields, 9> gf;
  area_ = 0.0;
  double S0 = 0.0;
  for (const Q8Element& el : mesh_.elements) {
    std::array<Vec2, 8> x;
    for (int i = 0; i < 8; ++i) x[i] = mesh_.nodes[el.nodes[i]];
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(8 * mesh_.dofs_per_node());
    bulk_gauss_fields(x, mesh_.grains[el.grain], zero, assembler_->params(el.grain).elastic, gf);
    for (const auto& g : gf) area_ += g.weight;
    S0 = std::max(S0, assembler_->params(el.grain).S0);
  }
  force_scale_ = S0 * area_;
}

double Simulation::abs_tolerance() const {
  return config_.newton_tol_abs > 0.0 ? config_.newton_tol_abs : 1e-12 * force_scale_;
}

std::string Simulation::describe_column(int col) const {
  const int dof = map_.column_dof(col);
  const int nd = mesh_.dofs_per_node();
  const int node = dof / nd, local = dof % nd;
  const std::string comp = local < 2 ? "u" + std::to_string(local + 1)
                                     : "gamma" + std::to_string(local - 1);
  return "node " + std::to_string(node) + " " + comp;
}

TimeStepResult Simulation::newton_solve(double t_new, double dt) {
  TimeStepResult res;
  res.snapshot_id = step_;
  trial_ready_ = false;
  const double load = program_.at(t_new);
  d_trial_ = d_;
  // The last increment says nothing about a constraint set changed since.
  if (config_.extrapolate && step_ > 0 && step_ != event_step_) {
    const double dl_prev = program_.at(t_) - program_.at(t_prev_);
    const double ratio = dl_prev != 0.0 ? (load - program_.at(t_)) / dl_prev : 0.0;
    // A reversal would flip every slip rate; start from rest instead.
    if (ratio > 0.0) d_trial_ += ratio * (d_ - d_prev_);
  }
  map_.impose(d_trial_, load);
  // Magnitudes for the round-off floor come from the committed state, so a
  // diverging iterate cannot raise its own acceptance threshold.
  d_ref_ = d_;
  map_.impose(d_ref_, load);
  const double tol_abs = abs_tolerance();
  double r0 = 0.0;
  char buf[160];

  for (int it = 0;; ++it) {
    assembler_->assemble(d_trial_, d_, states_, trial_, dt, true, work_);
    const Eigen::VectorXd r = map_.reduce(work_.f);
    const double norm = r.norm();
    res.residual_history.push_back(norm);
    if (log_level() == LogLevel::verbose) {
      std::snprintf(buf, sizeof buf, "newton step=%d iter=%d t=%.9g residual=%.6e", step_ + 1,
                    it, t_new, norm);
      log_line(LogLevel::verbose, buf);
    }
    if (!std::isfinite(norm)) break;
    if (it == 0) r0 = norm;
    // Round-off floor of the residual: eps * || |K| |d| ||.
    kd_.setZero(d_trial_.size());
    for (const Triplet& t : work_.triplets) kd_(t.row()) += std::abs(t.value() * d_ref_(t.col()));
    const double floor = std::numeric_limits<double>::epsilon() * map_.reduce(kd_).norm();
    if (norm <= std::max({tol_abs, floor, config_.newton_tol_rel * r0})) {
      res.converged = true;
      res.iterations = it;
      break;
    }
    if (it >= config_.max_newton_iter) break;
    if (it > 2 && norm > 1e8 * std::max(r0, tol_abs)) break;  // diverging

    const SparseMatrix K = map_.reduce(work_.triplets);
    const Eigen::VectorXd dx =
        linear_.solve(K, -r, [this](int c) { return describe_column(c); });
    map_.add_increment(d_trial_, dx);
    map_.impose(d_trial_, load);
  }
  if (!res.converged) res.iterations = static_cast<int>(res.residual_history.size()) - 1;
  if (res.converged) {
    trial_ready_ = true;
    t_trial_ = t_new;
    dt_trial_ = dt;
  }
  return res;
}

void Simulation::commit() {
  if (!trial_ready_) throw SolverError("commit without a converged trial state");
  d_prev_ = d_;
  t_prev_ = t_;
  states_prev_ = states_;
  d_ = d_trial_;
  states_ = trial_;
  t_ = t_trial_;
  ++step_;
  trial_ready_ = false;
}

int Simulation::apply_event(const Event& e) {
  std::set<int> roots;
  for (int dof : e.freeze_dofs) {
    if (dof < 0 || dof >= mesh_.n_dofs()) throw ConfigError("event dof out of range");
    const int c = map_.column(dof);
    if (c >= 0) roots.insert(map_.column_dof(c));
  }
  for (int r : roots) constraints_.dirichlet.push_back({r, Prescribed{d_(r), 0.0}});
  const int before = map_.n_free();
  map_ = ConstraintMap(mesh_.n_dofs(), constraints_);
  event_step_ = step_;
  if (map_.n_free() == 0) throw SolverError("event leaves no free degree of freedom");
  log_line(LogLevel::normal, "event '" + e.label + "' fixed " + std::to_string(roots.size()) +
                                 " unknowns at t=" + std::to_string(t_));
  return before - map_.n_free();
}

void Simulation::run(const Observer& observer, const std::vector<double>& breakpoints) {
  const double t_end = config_.t_end;
  const double eps = 1e-12 * std::max(1.0, t_end);

  std::vector<double> breaks;
  for (const auto& p : program_.points()) breaks.push_back(p.first);
  for (const Event& e : events_) breaks.push_back(e.time);
  for (double b : breakpoints) {
    if (b > 0.0 && b < t_end) breaks.push_back(b);
  }
  breaks.push_back(t_end);
  std::sort(breaks.begin(), breaks.end());

  auto fire_events = [&] {
    for (std::size_t i = 0; i < events_.size(); ++i) {
      if (!event_done_[i] && events_[i].time <= t_ + eps) {
        apply_event(events_[i]);
        event_done_[i] = 1;
      }
    }
  };

  if (observer) observer(*this, StepInfo{step_, t_, 0.0, load(), 0});
  double dt = config_.dt_initial;
  int cutbacks = 0;
  char buf[200];
  while (t_ < t_end - eps) {
    fire_events();
    double next = t_end;
    for (double b : breaks) {
      if (b > t_ + eps) {
        next = std::min(next, b);
        break;
      }
    }
    double h = std::min(dt, next - t_);
    if (next - t_ - h < 1e-3 * h) h = next - t_;  // avoid slivers before a breakpoint
    const double t_new = (h == next - t_) ? next : t_ + h;

    const TimeStepResult res = newton_solve(t_new, h);
    if (!res.converged) {
      ++cutbacks;
      dt = h * config_.cutback_factor;
      std::snprintf(buf, sizeof buf, "cutback at t=%.9g: dt -> %.6e after %d iterations", t_,
                    dt, res.iterations);
      log_line(LogLevel::normal, buf);
      if (dt < config_.dt_min) {
        std::snprintf(buf, sizeof buf, "time step fell below dt_min=%.3e at t=%.9g",
                      config_.dt_min, t_);
        throw SolverError(buf);
      }
      continue;
    }
    commit();
    report_.push_back({step_, t_, h, res.iterations, cutbacks, res.residual_history});
    std::snprintf(buf, sizeof buf, "step=%d t=%.9g dt=%.6e load=%.9g iterations=%d residual=%.6e",
                  step_, t_, h, load(), res.iterations, res.residual_history.back());
    log_line(LogLevel::normal, buf);
    cutbacks = 0;
    if (dt < config_.dt_initial) dt = std::min(config_.dt_initial, dt / config_.cutback_factor);
    if (observer) observer(*this, StepInfo{step_, t_, h, load(), res.iterations});
  }
  fire_events();
}

}  // namespace sgcp
