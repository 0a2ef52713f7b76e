#include <doctest.h>

#include <stdexcept>

#include "dif/config.hpp"

using namespace dif;

TEST_CASE("key=value parsing") {
  const KeyValueConfig cfg = KeyValueConfig::from_string(
      "# scenario\n"
      "T = 0.5\n"
      "steps=100   # trailing comment\n"
      "q1_values = 1e-3, 1e-1, 10\n"
      "\n"
      "prior_mean = 0, 10, 0, 10, 0\n");
  CHECK(cfg.get_double("T", 0.0) == 0.5);
  CHECK(cfg.get_int("steps", 0) == 100);
  const auto q1 = cfg.get_vector("q1_values", {});
  REQUIRE(q1.size() == 3);
  CHECK(q1[1] == 0.1);
  CHECK(cfg.get_vector("prior_mean", {}).size() == 5);
  CHECK(cfg.get_double("missing", 7.5) == 7.5);
}

TEST_CASE("overrides take precedence") {
  KeyValueConfig cfg = KeyValueConfig::from_string("seed = 1\n");
  cfg.set("seed=42");
  CHECK(cfg.get_uint64("seed", 0) == 42);
  CHECK_THROWS_AS(cfg.set("no_equals_sign"), std::runtime_error);
}

TEST_CASE("unknown keys are rejected with the valid list") {
  const KeyValueConfig cfg = KeyValueConfig::from_string("tpyo = 3\n");
  CHECK_THROWS_WITH_AS(cfg.require_known_keys({"T", "steps"}),
                       doctest::Contains("valid keys: T steps"),
                       std::runtime_error);
  CHECK_NOTHROW(KeyValueConfig::from_string("T=1\n").require_known_keys({"T"}));
}

TEST_CASE("malformed input") {
  CHECK_THROWS_WITH_AS(KeyValueConfig::from_string("just a line\n"),
                       doctest::Contains("key = value"), std::runtime_error);
  CHECK_THROWS_AS(KeyValueConfig::from_string("T = abc\n").get_double("T", 0),
                  std::runtime_error);
  CHECK_THROWS_AS(KeyValueConfig::from_file("/nonexistent/path.cfg"),
                  std::runtime_error);
}
