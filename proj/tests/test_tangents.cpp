#include "doctest.h"
#include "tangent_checks.hpp"

using namespace sgcp;

TEST_CASE("point tangents match central differences for every bulk model") {
  std::mt19937 rng(11);
  for (BulkModel m : {BulkModel::proposed, BulkModel::gurtin_energetic, BulkModel::gurtin_dissipative}) {
    for (int i = 0; i < 40; ++i) {
      CAPTURE(static_cast<int>(m));
      CAPTURE(i);
      CHECK(test::bulk_point_tangent_error(rng, m) < 1e-5);
    }
  }
}

TEST_CASE("bulk element stiffness matches differences of the internal force") {
  std::mt19937 rng(12);
  for (BulkModel m : {BulkModel::proposed, BulkModel::gurtin_energetic, BulkModel::gurtin_dissipative}) {
    for (int i = 0; i < 4; ++i) {
      CAPTURE(static_cast<int>(m));
      CAPTURE(i);
      CHECK(test::bulk_element_tangent_error(rng, m) < 1e-5);
    }
  }
}

TEST_CASE("interface element stiffness matches differences of the internal force") {
  std::mt19937 rng(13);
  for (int i = 0; i < 20; ++i) {
    CAPTURE(i);
    CHECK(test::interface_element_tangent_error(rng) < 1e-5);
  }
}
