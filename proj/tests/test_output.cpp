#include "sgcp/errors.hpp"
#include "sgcp/output.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sgcp;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("sgcp_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("csv formatting") {
  OutputSeries s("stress_strain", {"step", "time", "Gamma", "sigma12_avg"});
  CHECK(format_csv(s) == "step,time,Gamma,sigma12_avg\n");
  s.add_row({0, 0, 0, 0});
  s.add_row({1, 0.1, 1.0 / 3.0, -2.5e-300});
  CHECK(format_csv(s) ==
        "step,time,Gamma,sigma12_avg\n0,0,0,0\n1,0.10000000000000001,0.33333333333333331,-2.5e-300\n");
  CHECK_THROWS_AS(s.add_row({1, 2}), IoError);
  CHECK(s.column_index("Gamma") == 2);
  CHECK(s.column("time") == std::vector<double>{0.0, 0.1});
  CHECK_THROWS_AS(s.column("tau"), IoError);
}

TEST_CASE("csv values survive a text round trip") {
  OutputSeries s("v", {"x"});
  const double values[] = {0.1, 1e-17, 123456789.123456789, -7.0 / 3.0, 5e-324};
  for (double v : values) s.add_row({v});
  std::istringstream in(format_csv(s));
  std::string line;
  std::getline(in, line);
  for (double v : values) {
    std::getline(in, line);
    CHECK(std::strtod(line.c_str(), nullptr) == v);
  }
}

TEST_CASE("written outputs are deterministic files") {
  const auto dir = scratch_dir("out");
  OutputSeries a("alpha", {"c"}), empty("empty", {"a", "b"});
  a.add_row({1.5});
  write_outputs({a, empty}, (dir / "nested").string());
  const std::string first = slurp(dir / "nested" / "alpha.csv");
  CHECK(first == "c\n1.5\n");
  CHECK(slurp(dir / "nested" / "empty.csv") == "a,b\n");
  write_outputs({a}, (dir / "nested").string());
  CHECK(slurp(dir / "nested" / "alpha.csv") == first);

  write_text_file((dir / "blocker").string(), "x");
  CHECK_THROWS_AS(write_outputs({a}, (dir / "blocker").string()), IoError);
  CHECK_THROWS_AS(write_text_file((dir / "blocker" / "f.txt").string(), "x"), IoError);
  std::filesystem::remove_all(dir);
}
