#include "sgcp/config.hpp"

#include "sgcp/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace sgcp {

namespace pt = boost::property_tree;

std::string to_string(CaseKind k) {
  switch (k) {
    case CaseKind::shear_layer: return "shear-layer";
    case CaseKind::bicrystal_shear: return "bicrystal-shear";
    case CaseKind::bicrystal_tension: return "bicrystal-tension";
  }
  return "?";
}

std::string to_string(BulkModel m) {
  switch (m) {
    case BulkModel::proposed: return "proposed";
    case BulkModel::gurtin_energetic: return "gurtin-energetic";
    case BulkModel::gurtin_dissipative: return "gurtin-dissipative";
  }
  return "?";
}

std::string to_string(GbMode m) {
  switch (m) {
    case GbMode::proposed: return "proposed";
    case GbMode::micro_free: return "micro-free";
    case GbMode::micro_hard: return "micro-hard";
  }
  return "?";
}

std::string to_string(LoadKind k) {
  switch (k) {
    case LoadKind::monotonic: return "monotonic";
    case LoadKind::cyclic: return "cyclic";
    case LoadKind::nonproportional: return "nonproportional";
  }
  return "?";
}

std::string to_string(MicroBc b) { return b == MicroBc::hard ? "hard" : "free"; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

double parse_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
    bad(field, "expected a number, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  int v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
    bad(field, "expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true") return true;
  if (t == "false") return false;
  bad(field, "expected true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(field, item));
  }
  return out;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s;
}

template <class E>
E parse_enum(const std::string& field, const std::string& text, std::initializer_list<E> all) {
  const std::string t = trim(text);
  std::string options;
  for (E e : all) {
    if (to_string(e) == t) return e;
    options += (options.empty() ? "" : ", ") + to_string(e);
  }
  bad(field, "unknown value '" + t + "' (expected one of " + options + ")");
}

CaseKind parse_kind(const std::string& field, const std::string& t) {
  return parse_enum(field, t,
                    {CaseKind::shear_layer, CaseKind::bicrystal_shear, CaseKind::bicrystal_tension});
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const CaseConfig&)> get;
  std::function<void(CaseConfig&, const std::string&, const std::string&)> set;
};

#define SGCP_DOUBLE(sec, name, member)                                                    \
  Field{sec, name, [](const CaseConfig& c) { return fmt(c.member); },                     \
        [](CaseConfig& c, const std::string& f, const std::string& v) {                   \
          c.member = parse_double(f, v);                                                  \
        }}
#define SGCP_INT(sec, name, member)                                                       \
  Field{sec, name, [](const CaseConfig& c) { return std::to_string(c.member); },          \
        [](CaseConfig& c, const std::string& f, const std::string& v) {                   \
          c.member = parse_int(f, v);                                                     \
        }}
#define SGCP_LIST(sec, name, member)                                                      \
  Field{sec, name, [](const CaseConfig& c) { return fmt_list(c.member); },                \
        [](CaseConfig& c, const std::string& f, const std::string& v) {                   \
          c.member = parse_list(f, v);                                                    \
        }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"case", "kind", [](const CaseConfig& c) { return to_string(c.kind); },
            [](CaseConfig& c, const std::string& f, const std::string& v) {
              c.kind = parse_kind(f, v);
            }},
      Field{"case", "name", [](const CaseConfig& c) { return c.name; },
            [](CaseConfig& c, const std::string&, const std::string& v) { c.name = trim(v); }},

      Field{"material", "model", [](const CaseConfig& c) { return to_string(c.material.model); },
            [](CaseConfig& c, const std::string& f, const std::string& v) {
              c.material.model = parse_enum(f, v,
                                            {BulkModel::proposed, BulkModel::gurtin_energetic,
                                             BulkModel::gurtin_dissipative});
            }},
      SGCP_DOUBLE("material", "E", material.E),
      SGCP_DOUBLE("material", "nu", material.nu),
      SGCP_DOUBLE("material", "S0", material.S0),
      SGCP_DOUBLE("material", "d0_dot", material.d0_dot),
      SGCP_DOUBLE("material", "m_rate", material.m_rate),
      SGCP_DOUBLE("material", "omega", material.omega),
      SGCP_DOUBLE("material", "Lstar_ratio", material.Lstar_ratio),
      SGCP_DOUBLE("material", "zeta", material.zeta),
      SGCP_DOUBLE("material", "L_en_ratio", material.L_en_ratio),
      SGCP_DOUBLE("material", "L_d_ratio", material.L_d_ratio),
      SGCP_DOUBLE("material", "h_self", material.h_self),
      SGCP_DOUBLE("material", "q_latent", material.q_latent),

      SGCP_DOUBLE("geometry", "H", geometry.H),
      SGCP_DOUBLE("geometry", "W", geometry.W),
      SGCP_INT("geometry", "n_el", geometry.n_el),
      SGCP_INT("geometry", "n_el_grain", geometry.n_el_grain),
      SGCP_INT("geometry", "nx_grain", geometry.nx_grain),
      SGCP_INT("geometry", "ny", geometry.ny),
      SGCP_LIST("geometry", "theta_A", geometry.theta_A),
      SGCP_LIST("geometry", "theta_B", geometry.theta_B),

      Field{"gb", "mode", [](const CaseConfig& c) { return to_string(c.gb.mode); },
            [](CaseConfig& c, const std::string& f, const std::string& v) {
              c.gb.mode =
                  parse_enum(f, v, {GbMode::proposed, GbMode::micro_free, GbMode::micro_hard});
            }},
      SGCP_DOUBLE("gb", "c_s", gb.c_s),
      SGCP_DOUBLE("gb", "zeta_s", gb.zeta_s),
      Field{"gb", "share_parallel_slip",
            [](const CaseConfig& c) { return std::string(c.gb.share_parallel_slip ? "true" : "false"); },
            [](CaseConfig& c, const std::string& f, const std::string& v) {
              c.gb.share_parallel_slip = parse_bool(f, v);
            }},

      Field{"loading", "kind", [](const CaseConfig& c) { return to_string(c.loading.kind); },
            [](CaseConfig& c, const std::string& f, const std::string& v) {
              c.loading.kind = parse_enum(
                  f, v, {LoadKind::monotonic, LoadKind::cyclic, LoadKind::nonproportional});
            }},
      SGCP_DOUBLE("loading", "rate", loading.rate),
      SGCP_DOUBLE("loading", "max", loading.max),
      SGCP_DOUBLE("loading", "amplitude", loading.amplitude),
      SGCP_DOUBLE("loading", "period", loading.period),
      SGCP_INT("loading", "cycles", loading.cycles),
      SGCP_DOUBLE("loading", "switch_at", loading.switch_at),
      Field{"loading", "micro_bc", [](const CaseConfig& c) { return to_string(c.loading.micro_bc); },
            [](CaseConfig& c, const std::string& f, const std::string& v) {
              c.loading.micro_bc = parse_enum(f, v, {MicroBc::hard, MicroBc::free});
            }},

      SGCP_DOUBLE("solver", "dt", solver.dt),
      SGCP_DOUBLE("solver", "dt_min", solver.dt_min),
      SGCP_DOUBLE("solver", "tol_rel", solver.tol_rel),
      SGCP_DOUBLE("solver", "tol_abs", solver.tol_abs),
      SGCP_INT("solver", "max_iter", solver.max_iter),
      SGCP_DOUBLE("solver", "cutback", solver.cutback),

      SGCP_LIST("output", "profile_strains", output.profile_strains),
      SGCP_LIST("output", "field_strains", output.field_strains),
  };
  return table;
}

#undef SGCP_DOUBLE
#undef SGCP_INT
#undef SGCP_LIST

const Field* find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

}  // namespace

CaseConfig CaseConfig::defaults(CaseKind kind) {
  CaseConfig c;
  c.kind = kind;
  switch (kind) {
    case CaseKind::shear_layer:
      c.name = "shear_layer";
      break;
    case CaseKind::bicrystal_shear:
      c.name = "bicrystal_shear";
      c.material.E = 60840.0;
      c.material.S0 = 60.84;
      c.material.d0_dot = 0.001;
      c.geometry.W = 1.0;
      c.geometry.H = 0.01;
      c.geometry.theta_A = {10.0};
      c.geometry.theta_B = {-10.0};
      c.loading.max = 0.02;
      c.solver.dt = 0.2;
      break;
    case CaseKind::bicrystal_tension:
      c.name = "bicrystal_tension";
      c.material.E = 60840.0;
      c.material.S0 = 60.84;
      c.material.d0_dot = 0.001;
      c.material.Lstar_ratio = 10.0;
      c.geometry.W = 0.05;
      c.geometry.H = 0.05;
      c.geometry.theta_A = {30.0, -45.0};
      c.geometry.theta_B = {-30.0, -45.0};
      c.gb.c_s = 1e6;
      c.loading.max = 0.05;
      c.solver.dt = 0.5;
      break;
  }
  return c;
}

double CaseConfig::reference_length() const {
  return kind == CaseKind::bicrystal_shear ? geometry.W : geometry.H;
}

double CaseConfig::end_time() const {
  if (loading.kind == LoadKind::cyclic) return loading.period * loading.cycles;
  return loading.max / loading_rate();
}

void CaseConfig::validate() const {
  auto req = [](bool ok, const char* field, const char* what) {
    if (!ok) bad(field, what);
  };
  const MaterialConfig& m = material;
  req(m.E > 0.0, "material.E", "must be > 0");
  req(m.nu > -1.0 && m.nu < 0.5, "material.nu", "must lie in (-1, 0.5)");
  req(m.S0 > 0.0, "material.S0", "must be > 0");
  req(m.d0_dot > 0.0, "material.d0_dot", "must be > 0");
  req(m.m_rate > 0.0 && m.m_rate <= 1.0, "material.m_rate", "must lie in (0, 1]");
  req(m.omega > 0.0, "material.omega", "must be > 0");
  req(m.Lstar_ratio >= 0.0, "material.Lstar_ratio", "must be >= 0");
  req(m.zeta >= 0.0, "material.zeta", "must be >= 0");
  req(m.L_en_ratio >= 0.0, "material.L_en_ratio", "must be >= 0");
  req(m.L_d_ratio >= 0.0, "material.L_d_ratio", "must be >= 0");
  req(m.h_self >= 0.0, "material.h_self", "must be >= 0");
  req(m.q_latent >= 0.0, "material.q_latent", "must be >= 0");

  const GeometryConfig& g = geometry;
  req(g.H > 0.0, "geometry.H", "must be > 0");
  req(g.W > 0.0, "geometry.W", "must be > 0");
  req(g.n_el >= 1, "geometry.n_el", "must be >= 1");
  req(g.n_el_grain >= 2 && g.n_el_grain % 2 == 0, "geometry.n_el_grain", "must be even and >= 2");
  req(g.nx_grain >= 1, "geometry.nx_grain", "must be >= 1");
  req(g.ny >= 2 && g.ny % 2 == 0, "geometry.ny", "must be even and >= 2");
  req(!g.theta_A.empty() && g.theta_A.size() <= static_cast<std::size_t>(kMaxSlips),
      "geometry.theta_A", "needs 1 to 4 slip angles");
  if (kind != CaseKind::shear_layer) {
    req(g.theta_B.size() == g.theta_A.size(), "geometry.theta_B",
        "needs as many slip angles as theta_A");
  }

  req(gb.c_s >= 0.0, "gb.c_s", "must be >= 0");
  req(gb.zeta_s >= 0.0, "gb.zeta_s", "must be >= 0");
  req(!(gb.mode == GbMode::proposed && gb.c_s == 0.0 && gb.zeta_s > 0.0), "gb.zeta_s",
      "requires c_s > 0");

  const LoadingConfig& l = loading;
  req(l.rate >= 0.0, "loading.rate", "must be >= 0");
  req(l.period > 0.0, "loading.period", "must be > 0");
  req(l.cycles >= 1, "loading.cycles", "must be >= 1");
  if (l.kind == LoadKind::cyclic) {
    req(l.amplitude > 0.0, "loading.amplitude", "must be > 0");
  } else {
    req(l.max > 0.0, "loading.max", "must be > 0");
  }
  if (l.kind == LoadKind::nonproportional) {
    req(kind == CaseKind::shear_layer, "loading.kind", "nonproportional needs the shear layer");
    req(l.switch_at > 0.0 && l.switch_at < l.max, "loading.switch_at",
        "must lie strictly between 0 and loading.max");
  }

  req(solver.dt > 0.0, "solver.dt", "must be > 0");
  req(solver.dt_min > 0.0 && solver.dt_min <= solver.dt, "solver.dt_min",
      "must satisfy 0 < dt_min <= dt");
  req(solver.tol_rel > 0.0, "solver.tol_rel", "must be > 0");
  req(solver.tol_abs >= 0.0, "solver.tol_abs", "must be >= 0");
  req(solver.max_iter >= 1, "solver.max_iter", "must be >= 1");
  req(solver.cutback > 0.0 && solver.cutback < 1.0, "solver.cutback", "must lie in (0, 1)");
  for (double s : output.profile_strains) req(std::isfinite(s), "output.profile_strains", "must be finite");
}

CaseConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' outside a section");
    }
    static const std::set<std::string> known = {"case",    "material", "geometry", "gb",
                                                "loading", "solver",   "output"};
    if (!known.count(section)) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!find_field(section, key)) {
        throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
      }
    }
  }

  const auto kind_text = tree.get_optional<std::string>("case.kind");
  if (!kind_text) throw ConfigError("case.kind: missing (required)");
  CaseConfig c = CaseConfig::defaults(parse_kind("case.kind", *kind_text));

  const auto loading = tree.get_child_optional("loading");
  if (!loading || loading->empty()) throw ConfigError("loading: block is missing or empty");
  if (!loading->get_optional<std::string>("kind")) throw ConfigError("loading.kind: missing (required)");

  for (const Field& f : fields()) {
    if (std::string(f.section) == "case" && std::string(f.key) == "kind") continue;
    const auto v = tree.get_optional<std::string>(std::string(f.section) + "." + f.key);
    if (v) f.set(c, std::string(f.section) + "." + f.key, *v);
  }
  c.validate();
  return c;
}

CaseConfig load_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const CaseConfig& c) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(c) + "\n";
  }
  return out;
}

void set_config_value(CaseConfig& c, const std::string& path, const std::string& value) {
  const auto dot = path.find('.');
  if (dot == std::string::npos) throw ConfigError("parameter '" + path + "' must be section.key");
  const Field* f = find_field(path.substr(0, dot), path.substr(dot + 1));
  if (!f) throw ConfigError("unknown parameter '" + path + "'");
  if (path == "case.kind") throw ConfigError("case.kind cannot be swept");
  f->set(c, path, value);
  c.validate();
}

BulkMaterialParams bulk_params(const CaseConfig& c, std::span<const SlipSystem> slips) {
  const double L = c.reference_length();
  BulkMaterialParams p;
  p.elastic = ElasticLaw::from_young_poisson(c.material.E, c.material.nu);
  p.S0 = c.material.S0;
  p.d0_dot = c.material.d0_dot;
  p.m_rate = c.material.m_rate;
  p.omega = c.material.omega;
  p.model = c.material.model;
  p.Lstar = c.material.Lstar_ratio * L;
  p.zeta = c.material.zeta;
  p.L_en = c.material.L_en_ratio * L;
  p.L_d = c.material.L_d_ratio * L;
  if (c.material.h_self != 0.0) p.hardening = hardening_matrix(slips, c.material.h_self, c.material.q_latent);
  p.validate();
  return p;
}

GbMaterialParams gb_params(const CaseConfig& c) {
  GbMaterialParams g;
  g.c_s = c.gb.c_s;
  g.zeta_s = c.gb.zeta_s;
  g.mode = c.gb.mode;
  g.validate();
  return g;
}

SolverConfig solver_config(const CaseConfig& c) {
  SolverConfig s;
  s.dt_initial = c.solver.dt;
  s.dt_min = c.solver.dt_min;
  s.newton_tol_rel = c.solver.tol_rel;
  s.newton_tol_abs = c.solver.tol_abs;
  s.max_newton_iter = c.solver.max_iter;
  s.cutback_factor = c.solver.cutback;
  s.t_end = c.end_time();
  return s;
}

}  // namespace sgcp
