#include "sgcp/cases.hpp"

#include "sgcp/errors.hpp"
#include "sgcp/logging.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace sgcp {

const OutputSeries& CaseOutputs::get(const std::string& name) const {
  for (const auto& s : series) {
    if (s.name == name) return s;
  }
  throw IoError("no output series named '" + name + "'");
}

LoadProgram load_program(const CaseConfig& c) {
  if (c.loading.kind == LoadKind::cyclic) {
    return LoadProgram::triangle(c.loading.amplitude, c.loading.period, c.loading.cycles);
  }
  return LoadProgram::ramp(c.loading_rate(), c.end_time());
}

namespace {

std::vector<double> sample_times(const LoadProgram& prog, const std::vector<double>& strains,
                                 double t_end, const char* field) {
  if (strains.empty()) return {t_end};
  std::vector<double> out;
  for (double s : strains) {
    const double t = prog.first_time_at(s);
    if (t < 0.0) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: strain %g is never reached by the loading", field, s);
      throw ConfigError(buf);
    }
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::array<Vec2, 8> element_coords(const MixedMesh& m, int e) {
  std::array<Vec2, 8> x;
  for (int i = 0; i < 8; ++i) x[i] = m.nodes[m.elements[e].nodes[i]];
  return x;
}

// Cartesian shape derivatives at a natural point; returns detJ.
double shape_gradients(const std::array<Vec2, 8>& x, double xi, double eta,
                       Eigen::Matrix<double, 8, 2>& dNdx) {
  const Q8Shape sh = q8_shape(xi, eta);
  Mat2 J = Mat2::Zero();
  for (int i = 0; i < 8; ++i) J += x[i] * sh.dN.row(i);
  const double det = J.determinant();
  if (!(det > 0.0)) throw MeshError("non-positive Jacobian in post-processing");
  dNdx = sh.dN * J.inverse();
  return det;
}

}  // namespace

CaseSetup build_case(const CaseConfig& c) {
  c.validate();
  CaseSetup s;
  s.layout = generate_mesh(c);
  const MixedMesh& m = s.layout.mesh;
  std::vector<BulkMaterialParams> params;
  for (const auto& g : m.grains) params.push_back(bulk_params(c, g));
  LoadProgram prog = load_program(c);
  const SolverConfig sc = solver_config(c);

  std::vector<Event> events;
  if (c.loading.kind == LoadKind::nonproportional) {
    const double t = prog.first_time_at(c.loading.switch_at);
    events.push_back({t, s.layout.switch_dofs, "micro-hard switch"});
  }
  s.profile_times = sample_times(prog, c.output.profile_strains, sc.t_end, "output.profile_strains");
  s.field_times = sample_times(prog, c.output.field_strains, sc.t_end, "output.field_strains");
  s.sim = std::make_unique<Simulation>(m, std::move(params), gb_params(c), std::move(prog), sc,
                                       std::move(events));
  return s;
}

// ---------------------------------------------------------------------------

DomainAverages domain_averages(const Assembler& assembler, const Eigen::VectorXd& d,
                               const StateStore& states) {
  const MixedMesh& m = assembler.mesh();
  DomainAverages a;
  a.min_D_inc = std::numeric_limits<double>::infinity();
  a.min_D_gb_inc = std::numeric_limits<double>::infinity();
  std::vector<int> dofs;
  std::array<GaussFields, 9> gf;
  Eigen::VectorXd de;
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const int grain = m.elements[e].grain;
    assembler.element_dofs(static_cast<int>(e), dofs);
    de.resize(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t j = 0; j < dofs.size(); ++j) de(j) = d(dofs[j]);
    bulk_gauss_fields(element_coords(m, static_cast<int>(e)), m.grains[grain], de,
                      assembler.params(grain).elastic, gf);
    for (int g = 0; g < 9; ++g) {
      const double w = gf[g].weight;
      const BulkPointState& st = states.bulk[e * 9 + g];
      a.area += w;
      a.stress += w * gf[g].stress;
      a.D += w * st.D_acc;
      a.Dh += w * st.Dh_acc;
      a.D_inc += w * st.D_inc;
      a.Dh_inc += w * st.Dh_inc;
      a.psi += w * st.Wdef;
      a.min_D_inc = std::min(a.min_D_inc, st.D_inc);
    }
  }
  if (a.area > 0.0) {
    a.stress /= a.area;
    a.D /= a.area;
    a.Dh /= a.area;
    a.D_inc /= a.area;
    a.Dh_inc /= a.area;
    a.psi /= a.area;
  }
  const GbMaterialParams& gp = assembler.gb_params();
  for (std::size_t i = 0; i < m.interfaces.size(); ++i) {
    std::array<Vec2, 3> x;
    for (int q = 0; q < 3; ++q) x[q] = m.nodes[m.interfaces[i].a_nodes[q]];
    const auto w = interface_weights(x);
    for (int g = 0; g < 3; ++g) {
      const GbPointState& st = states.gb[i * 3 + g];
      a.D_gb += w[g] * st.D_acc;
      a.D_gb_inc += w[g] * st.D_inc;
      a.psi_gb += w[g] * gb_defect_energy(st, gp);
      a.min_D_gb_inc = std::min(a.min_D_gb_inc, st.D_inc);
    }
  }
  if (m.elements.empty()) a.min_D_inc = 0.0;
  if (m.interfaces.empty()) a.min_D_gb_inc = 0.0;
  return a;
}

std::vector<double> project_to_nodes(const MixedMesh& m,
                                     const std::vector<std::array<double, 9>>& gauss) {
  if (gauss.size() != m.elements.size()) throw MeshError("projection: one value set per element");
  // A(g, i) = N_i at Gauss point g; the same for every element.
  static const Eigen::Matrix<double, 8, 9> fit = [] {
    Eigen::Matrix<double, 9, 8> A;
    for (int g = 0; g < 9; ++g) {
      const Vec2 p = q8_gauss_natural(g);
      A.row(g) = q8_shape(p.x(), p.y()).N.transpose();
    }
    return Eigen::Matrix<double, 8, 9>((A.transpose() * A).ldlt().solve(A.transpose()));
  }();
  std::vector<double> sum(m.nodes.size(), 0.0);
  std::vector<int> count(m.nodes.size(), 0);
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const Eigen::Map<const Eigen::Matrix<double, 9, 1>> v(gauss[e].data());
    const Eigen::Matrix<double, 8, 1> nodal = fit * v;
    for (int i = 0; i < 8; ++i) {
      sum[m.elements[e].nodes[i]] += nodal(i);
      ++count[m.elements[e].nodes[i]];
    }
  }
  for (std::size_t n = 0; n < sum.size(); ++n) {
    if (count[n] > 0) sum[n] /= count[n];
  }
  return sum;
}

std::vector<Vec2> nodal_gradient(const MixedMesh& m, const Eigen::VectorXd& d, int local_dof) {
  std::vector<Vec2> sum(m.nodes.size(), Vec2::Zero());
  std::vector<int> count(m.nodes.size(), 0);
  Eigen::Matrix<double, 8, 2> dNdx;
  Eigen::Matrix<double, 8, 1> v;
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const auto& el = m.elements[e];
    const auto x = element_coords(m, static_cast<int>(e));
    for (int j = 0; j < 8; ++j) v(j) = d(m.dof(el.nodes[j], local_dof));
    for (int i = 0; i < 8; ++i) {
      const Vec2 p = q8_node_coords()[i];
      shape_gradients(x, p.x(), p.y(), dNdx);
      sum[el.nodes[i]] += dNdx.transpose() * v;
      ++count[el.nodes[i]];
    }
  }
  for (std::size_t n = 0; n < sum.size(); ++n) {
    if (count[n] > 0) sum[n] /= count[n];
  }
  return sum;
}

std::vector<double> nodal_gnd_density(const MixedMesh& m, const Eigen::VectorXd& d, int a) {
  std::vector<std::array<double, 9>> gauss(m.elements.size());
  Eigen::Matrix<double, 8, 2> dNdx;
  Eigen::Matrix<double, 8, 1> v;
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const auto& el = m.elements[e];
    const auto x = element_coords(m, static_cast<int>(e));
    const SlipSystem& sys = m.grains[el.grain][a];
    for (int j = 0; j < 8; ++j) v(j) = d(m.dof(el.nodes[j], 2 + a));
    for (int g = 0; g < 9; ++g) {
      const Vec2 p = q8_gauss_natural(g);
      shape_gradients(x, p.x(), p.y(), dNdx);
      gauss[e][g] = edge_gnd_density(sys, dNdx.transpose() * v);
    }
  }
  return project_to_nodes(m, gauss);
}

// ---------------------------------------------------------------------------

namespace {

std::string idx(int a) { return std::to_string(a + 1); }

bool at_time(double t, double target) {
  return std::abs(t - target) <= 1e-9 * std::max(1.0, std::abs(target));
}

CaseOutputs run_impl(const CaseConfig& c) {
  const auto t_start = std::chrono::steady_clock::now();
  CaseSetup setup = build_case(c);
  Simulation& sim = *setup.sim;
  const MeshLayout& L = setup.layout;
  const MixedMesh& m = sim.mesh();
  const int k = m.n_slip;
  const bool tension = c.kind == CaseKind::bicrystal_tension;
  const bool bicrystal = c.kind != CaseKind::shear_layer;

  char buf[200];
  std::snprintf(buf, sizeof buf, "case %s (%s): %zu elements, %zu interfaces, %d dofs, %d unknowns",
                c.name.c_str(), to_string(c.kind).c_str(), m.elements.size(), m.interfaces.size(),
                m.n_dofs(), sim.constraint_map().n_free());
  log_line(LogLevel::normal, buf);

  OutputSeries ss("stress_strain", tension
                                       ? std::vector<std::string>{"step", "time", "strain", "sigma11_avg"}
                                       : std::vector<std::string>{"step", "time", "Gamma", "sigma12_avg"});
  OutputSeries av("averages", {"step", "time", "load", "D_avg", "D_rate_avg", "Dh_avg", "Dh_rate_avg",
                               "psi_avg", "D_gb", "D_gb_rate", "psi_gb"});

  std::vector<std::string> node_cols{"step", "time", "load", "node", "x1", "x2", "grain"};
  for (int a = 0; a < k; ++a) {
    for (const char* f : {"gamma_", "dgamma_dx1_", "dgamma_dx2_", "rho_"}) node_cols.push_back(f + idx(a));
  }
  std::vector<std::string> prof_cols = node_cols;
  for (const char* f : {"gp12", "dgp12_dx1", "dgp12_dx2"}) prof_cols.push_back(f);
  OutputSeries prof("profiles", prof_cols);
  OutputSeries field("fields", node_cols);

  std::vector<std::string> gb_cols{"step", "time", "load"};
  for (std::size_t p = 0; p < L.gb_probes.size(); ++p) {
    const std::string pre = "p" + std::to_string(p + 1) + "_";
    for (int a = 0; a < k; ++a) {
      for (const char* f : {"gammaA_", "gammaB_", "jump_", "rhoA_", "rhoB_"}) {
        gb_cols.push_back(pre + f + idx(a));
      }
    }
  }
  OutputSeries gbs("gb_probes", gb_cols);

  CaseOutputs out;
  out.n_dofs = m.n_dofs();
  out.n_unknowns = sim.constraint_map().n_free();
  std::size_t next_profile = 0, next_field = 0;

  auto node_row = [&](const Eigen::VectorXd& d, const std::vector<Vec2>* grads,
                      const std::vector<double>* rho, int n, double t, int step, double load) {
    std::vector<double> r{static_cast<double>(step), t, load, static_cast<double>(n),
                          m.nodes[n].x(), m.nodes[n].y(), static_cast<double>(L.node_grain[n])};
    for (int a = 0; a < k; ++a) {
      r.push_back(d(m.dof(n, 2 + a)));
      r.push_back(grads[a][n].x());
      r.push_back(grads[a][n].y());
      r.push_back(rho[a][n]);
    }
    return r;
  };

  auto observer = [&](const Simulation& s, const Simulation::StepInfo& info) {
    const Eigen::VectorXd& d = s.solution();
    const DomainAverages a = domain_averages(s.assembler(), d, s.states());
    const double step = info.step;
    if (info.step > 0) {
      if (out.steps == 0) {
        out.min_bulk_dissipation_increment = a.min_D_inc;
        out.min_gb_dissipation_increment = a.min_D_gb_inc;
      }
      out.min_bulk_dissipation_increment = std::min(out.min_bulk_dissipation_increment, a.min_D_inc);
      out.min_gb_dissipation_increment = std::min(out.min_gb_dissipation_increment, a.min_D_gb_inc);
      out.steps = info.step;
    }
    ss.add_row({step, info.time, info.load, tension ? a.stress(0) : a.stress(2)});
    const double inv_dt = info.dt > 0.0 ? 1.0 / info.dt : 0.0;
    av.add_row({step, info.time, info.load, a.D, a.D_inc * inv_dt, a.Dh, a.Dh_inc * inv_dt, a.psi,
                a.D_gb, a.D_gb_inc * inv_dt, a.psi_gb});

    const bool want_profile = next_profile < setup.profile_times.size() &&
                              at_time(info.time, setup.profile_times[next_profile]);
    const bool want_field = tension && next_field < setup.field_times.size() &&
                            at_time(info.time, setup.field_times[next_field]);
    std::vector<std::vector<Vec2>> grads;
    std::vector<std::vector<double>> rho;
    if (want_profile || want_field || bicrystal) {
      for (int al = 0; al < k; ++al) rho.push_back(nodal_gnd_density(m, d, al));
    }
    if (want_profile || want_field) {
      for (int al = 0; al < k; ++al) grads.push_back(nodal_gradient(m, d, 2 + al));
    }
    if (bicrystal) {
      std::vector<double> r{step, info.time, info.load};
      for (const auto& [na, nb] : L.gb_probes) {
        for (int al = 0; al < k; ++al) {
          const double ga = d(m.dof(na, 2 + al)), gbv = d(m.dof(nb, 2 + al));
          for (double v : {ga, gbv, gbv - ga, rho[al][na], rho[al][nb]}) r.push_back(v);
        }
      }
      gbs.add_row(std::move(r));
    }
    if (want_profile) {
      for (int n : L.profile_nodes) {
        auto r = node_row(d, grads.data(), rho.data(), n, info.time, info.step, info.load);
        const auto& slips = m.grains[L.node_grain[n]];
        double gp = 0.0;
        Vec2 dg = Vec2::Zero();
        for (int al = 0; al < k; ++al) {
          gp += slips[al].schmid_sym(0, 1) * d(m.dof(n, 2 + al));
          dg += slips[al].schmid_sym(0, 1) * grads[al][n];
        }
        r.push_back(gp);
        r.push_back(dg.x());
        r.push_back(dg.y());
        prof.add_row(std::move(r));
      }
      ++next_profile;
    }
    if (want_field) {
      for (int n = 0; n < static_cast<int>(m.nodes.size()); ++n) {
        field.add_row(node_row(d, grads.data(), rho.data(), n, info.time, info.step, info.load));
      }
      ++next_field;
    }
  };

  std::vector<double> breaks = setup.profile_times;
  breaks.insert(breaks.end(), setup.field_times.begin(), setup.field_times.end());
  sim.run(observer, breaks);

  out.series.push_back(std::move(ss));
  out.series.push_back(std::move(av));
  out.series.push_back(std::move(prof));
  if (bicrystal) out.series.push_back(std::move(gbs));
  if (tension) out.series.push_back(std::move(field));

  OutputSeries conv("convergence", {"step", "time", "dt", "iterations", "cutbacks", "residual"});
  for (const StepRecord& r : sim.report()) {
    conv.add_row({static_cast<double>(r.step), r.time, r.dt, static_cast<double>(r.iterations),
                  static_cast<double>(r.cutbacks),
                  r.residual_history.empty() ? 0.0 : r.residual_history.back()});
  }
  out.series.push_back(std::move(conv));
  out.convergence = sim.report();
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

void require_kind(const CaseConfig& c, CaseKind k) {
  if (c.kind != k) {
    throw ConfigError("case.kind is " + to_string(c.kind) + ", expected " + to_string(k));
  }
}

}  // namespace

CaseOutputs run_case(const CaseConfig& c) { return run_impl(c); }

std::string code_version() {
#ifdef SGCP_VERSION
  return SGCP_VERSION;
#else
  return "unknown";
#endif
}

void write_case_outputs(const CaseConfig& c, const CaseOutputs& out, const std::string& dir) {
  write_outputs(out.series, dir);
  const std::string ini = serialize_config(c);
  write_text_file(dir + "/config.ini", ini);
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["kind"] = to_string(c.kind);
  j["version"] = code_version();
  j["wall_seconds"] = out.wall_seconds;
  j["steps"] = out.steps;
  j["dofs"] = out.n_dofs;
  j["unknowns"] = out.n_unknowns;
  j["min_bulk_dissipation_increment"] = out.min_bulk_dissipation_increment;
  j["min_gb_dissipation_increment"] = out.min_gb_dissipation_increment;
  std::vector<std::string> names;
  for (const auto& s : out.series) names.push_back(s.name + ".csv");
  j["series"] = names;
  j["config"] = ini;
  write_text_file(dir + "/manifest.json", j.dump(2) + "\n");
}

std::vector<SweepPoint> run_sweep(const CaseConfig& base, const std::string& param,
                                  const std::vector<std::string>& values) {
  if (values.empty()) throw ConfigError("sweep " + param + ": no values");
  std::vector<SweepPoint> points;
  for (const auto& v : values) {
    SweepPoint p;
    p.value = v;
    p.config = base;
    set_config_value(p.config, param, v);
    p.config.name = base.name + "_" + v;
    p.config.validate();
    points.push_back(std::move(p));
  }
  for (auto& p : points) {
    log_line(LogLevel::normal, "sweep " + param + "=" + p.value);
    p.outputs = run_case(p.config);
  }
  return points;
}

OutputSeries sweep_summary(const std::vector<SweepPoint>& points) {
  OutputSeries s("sweep", {"point", "value", "steps", "load", "stress", "D_avg", "D_rate_avg",
                           "Dh_avg", "psi_avg", "D_gb", "psi_gb"});
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& o = points[i].outputs;
    double value = std::numeric_limits<double>::quiet_NaN();
    try {
      value = std::stod(points[i].value);
    } catch (const std::exception&) {
    }
    const auto& ss = o.get("stress_strain").rows.back();
    const OutputSeries& av = o.get("averages");
    const auto& a = av.rows.back();
    auto col = [&](const char* n) { return a[av.column_index(n)]; };
    s.add_row({static_cast<double>(i), value, static_cast<double>(o.steps), ss[2], ss[3],
               col("D_avg"), col("D_rate_avg"), col("Dh_avg"), col("psi_avg"), col("D_gb"),
               col("psi_gb")});
  }
  return s;
}

CaseOutputs run_shear_layer(const CaseConfig& c) {
  require_kind(c, CaseKind::shear_layer);
  return run_impl(c);
}

CaseOutputs run_bicrystal_shear(const CaseConfig& c) {
  require_kind(c, CaseKind::bicrystal_shear);
  return run_impl(c);
}

CaseOutputs run_bicrystal_tension(const CaseConfig& c) {
  require_kind(c, CaseKind::bicrystal_tension);
  return run_impl(c);
}

}  // namespace sgcp
