#pragma once

// Case configuration: sectioned key-value text (INI). See README for the grammar.

#include "sgcp/bulk_material.hpp"
#include "sgcp/gb_material.hpp"
#include "sgcp/solver.hpp"

#include <string>
#include <vector>

namespace sgcp {

enum class CaseKind { shear_layer, bicrystal_shear, bicrystal_tension };
enum class LoadKind { monotonic, cyclic, nonproportional };
enum class MicroBc { hard, free };

struct MaterialConfig {
  BulkModel model = BulkModel::proposed;
  double E = 260000.0;
  double nu = 0.3;
  double S0 = 50.0;
  double d0_dot = 0.02;
  double m_rate = 0.05;
  double omega = 0.01;
  // Length scales as ratios of the case reference length (H or W).
  double Lstar_ratio = 2.0;
  double zeta = 0.0;
  double L_en_ratio = 0.0;
  double L_d_ratio = 0.0;
  double h_self = 0.0;
  double q_latent = 1.0;

  bool operator==(const MaterialConfig&) const = default;
};

struct GeometryConfig {
  double H = 1.0;  // mm
  double W = 1.0;  // mm
  int n_el = 100;          // shear layer: elements through the height
  int n_el_grain = 100;    // bicrystal shear: elements across a full grain
  int nx_grain = 45;       // bicrystal tension: elements across each grain
  int ny = 40;             // bicrystal tension: elements through the height
  std::vector<double> theta_A{60.0, -60.0};  // degrees
  std::vector<double> theta_B{};             // degrees, bicrystals only

  bool operator==(const GeometryConfig&) const = default;
};

struct GbConfig {
  GbMode mode = GbMode::proposed;
  double c_s = 0.0;
  double zeta_s = 0.0;
  // Systems with identical orientation on both sides and no GB Burgers
  // contribution share their slip unknown across the boundary.
  bool share_parallel_slip = true;

  bool operator==(const GbConfig&) const = default;
};

struct LoadingConfig {
  LoadKind kind = LoadKind::monotonic;
  double rate = 0.0;        // 1/s; 0 selects d0_dot
  double max = 0.025;       // final strain (monotonic, nonproportional)
  double amplitude = 0.01;  // cyclic
  double period = 4.0;      // s
  int cycles = 1;
  double switch_at = 0.01;  // nonproportional: strain of the micro-free -> micro-hard switch
  MicroBc micro_bc = MicroBc::hard;

  bool operator==(const LoadingConfig&) const = default;
};

struct SolverBlock {
  double dt = 0.005;
  double dt_min = 1e-8;
  double tol_rel = 1e-8;
  double tol_abs = 0.0;
  int max_iter = 25;
  double cutback = 0.5;

  bool operator==(const SolverBlock&) const = default;
};

struct OutputConfig {
  std::vector<double> profile_strains;
  std::vector<double> field_strains;

  bool operator==(const OutputConfig&) const = default;
};

struct CaseConfig {
  CaseKind kind = CaseKind::shear_layer;
  std::string name = "case";
  MaterialConfig material;
  GeometryConfig geometry;
  GbConfig gb;
  LoadingConfig loading;
  SolverBlock solver;
  OutputConfig output;

  bool operator==(const CaseConfig&) const = default;

  /// Defaults for a case kind (material tables, geometry, step size).
  static CaseConfig defaults(CaseKind kind);

  double reference_length() const;
  double loading_rate() const { return loading.rate > 0.0 ? loading.rate : material.d0_dot; }
  /// Time at which the loading program ends.
  double end_time() const;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses INI text; unknown sections or keys are rejected.
CaseConfig parse_config(const std::string& text);
CaseConfig load_config_file(const std::string& path);
/// Writes every field, so parse_config(serialize_config(c)) == c.
std::string serialize_config(const CaseConfig& c);

/// Sets one field from a "section.key" path; used by the sweep command.
void set_config_value(CaseConfig& c, const std::string& path, const std::string& value);

std::string to_string(CaseKind k);
std::string to_string(BulkModel m);
std::string to_string(GbMode m);
std::string to_string(LoadKind k);
std::string to_string(MicroBc b);

/// Bulk parameters in solver units for one grain.
BulkMaterialParams bulk_params(const CaseConfig& c, std::span<const SlipSystem> slips);
GbMaterialParams gb_params(const CaseConfig& c);
SolverConfig solver_config(const CaseConfig& c);

}  // namespace sgcp
