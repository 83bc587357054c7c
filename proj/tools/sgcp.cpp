// Command-line entry point: run, mesh-dump and sweep.

#include "sgcp/cases.hpp"
#include "sgcp/errors.hpp"
#include "sgcp/logging.hpp"

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

enum ExitCode {
  kOk = 0,
  kUnknown = 1,
  kUsage = 2,
  kConfig = 3,
  kMesh = 4,
  kConstitutive = 5,
  kSolver = 6,
  kIo = 7,
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

sgcp::CaseConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  sgcp::CaseConfig c = sgcp::load_config_file(path);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw sgcp::ConfigError("--set expects section.key=value, got '" + o + "'");
    sgcp::set_config_value(c, o.substr(0, eq), o.substr(eq + 1));
  }
  c.validate();
  return c;
}

int report(const char* category, const std::exception& e, int code) {
  std::fprintf(stderr, "sgcp: %s error: %s\n", category, e.what());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strain-gradient crystal plasticity benchmark solver"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  int threads = 0;
  std::string level = "n";
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (default: OMP_NUM_THREADS or all cores)");
  app.add_option("--log-level", level, "q (quiet), n (normal) or v (verbose)")
      ->check(CLI::IsMember({"q", "n", "v"}))
      ->capture_default_str();

  std::string config_path;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "Run one case and write its CSV series");
  run->add_option("config", config_path, "Case configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "Override a field: section.key=value")->take_all();

  auto* dump = app.add_subcommand("mesh-dump", "Print the generated mesh and constraints");
  dump->add_option("config", config_path, "Case configuration file")->required()->check(CLI::ExistingFile);
  dump->add_option("--set", overrides, "Override a field: section.key=value")->take_all();

  std::string sweep_spec;
  auto* sweep = app.add_subcommand("sweep", "Run a case for each value of one parameter");
  sweep->add_option("config", config_path, "Case configuration file")->required()->check(CLI::ExistingFile);
  sweep->add_option("param", sweep_spec, "section.key=v1,v2,...")->required();
  sweep->add_option("--set", overrides, "Override a field: section.key=value")->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  sgcp::set_log_level(level == "q" ? sgcp::LogLevel::quiet
                      : level == "v" ? sgcp::LogLevel::verbose
                                     : sgcp::LogLevel::normal);
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*run) {
      const sgcp::CaseConfig c = load(config_path, overrides);
      const sgcp::CaseOutputs o = sgcp::run_case(c);
      sgcp::write_case_outputs(c, o, out_dir);
      char buf[160];
      std::snprintf(buf, sizeof buf, "wrote %s (%d steps, %.2f s)", out_dir.c_str(), o.steps,
                    o.wall_seconds);
      sgcp::log_line(sgcp::LogLevel::normal, buf);
    } else if (*dump) {
      const sgcp::CaseConfig c = load(config_path, overrides);
      std::cout << sgcp::mesh_dump(sgcp::generate_mesh(c).mesh);
    } else if (*sweep) {
      const auto eq = sweep_spec.find('=');
      if (eq == std::string::npos) {
        throw sgcp::ConfigError("sweep parameter must read section.key=v1,v2,...");
      }
      const std::string param = sweep_spec.substr(0, eq);
      const auto values = split(sweep_spec.substr(eq + 1), ',');
      const sgcp::CaseConfig c = load(config_path, overrides);
      const auto points = sgcp::run_sweep(c, param, values);
      for (const auto& p : points) {
        const std::string dir = (std::filesystem::path(out_dir) / (param + "=" + p.value)).string();
        sgcp::write_case_outputs(p.config, p.outputs, dir);
      }
      sgcp::write_outputs({sgcp::sweep_summary(points)}, out_dir);
    }
  } catch (const sgcp::ConfigError& e) {
    return report("config", e, kConfig);
  } catch (const sgcp::MeshError& e) {
    return report("mesh", e, kMesh);
  } catch (const sgcp::ConstitutiveError& e) {
    return report("constitutive", e, kConstitutive);
  } catch (const sgcp::SolverError& e) {
    return report("solver", e, kSolver);
  } catch (const sgcp::IoError& e) {
    return report("io", e, kIo);
  } catch (const std::exception& e) {
    return report("internal", e, kUnknown);
  }
  return kOk;
}
