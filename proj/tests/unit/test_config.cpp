#include "mlo/config.hpp"
#include "mlo/errors.hpp"

#include <doctest.h>

#include <sstream>
#include <string>

using namespace mlo;

namespace {

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST_CASE("empty config gives defaults") {
  const ScenarioConfig c = parse("");
  CHECK(c.n_mld == 2);
  CHECK(c.n_sld == 2);
  CHECK(c.gamma_is_auto());
  CHECK(c.backoff.w0 == 16);
  CHECK(c.phy.n_a == 1);
}

TEST_CASE("keys in every section are read") {
  const ScenarioConfig c = parse(
      "[scenario]\nn_mld = 3\nn_sld = 4\ngamma = 0.25\n"
      "[backoff]\nw0 = 8\nm = 3\ncw_min_sld = 7\n"
      "[phy]\nn_a = 64\nr_su = 4000.5\nt_empty = 9\n");
  CHECK(c.n_mld == 3);
  CHECK(c.n_sld == 4);
  REQUIRE(c.gamma);
  CHECK(*c.gamma == doctest::Approx(0.25));
  CHECK(c.backoff.w0 == 8);
  CHECK(c.backoff.m == 3);
  CHECK(c.backoff.cw_min_sld == 7);
  CHECK(c.phy.n_a == 64);
  CHECK(c.phy.r_su == doctest::Approx(4000.5));
}

TEST_CASE("gamma auto") {
  CHECK(parse("[scenario]\ngamma = auto\n").gamma_is_auto());
}

TEST_CASE("errors carry line numbers") {
  CHECK(error_of("[scenario]\nn_mld = 2\nbogus = 1\n") == "test.ini:3: scenario.bogus: unknown key");
  CHECK(error_of("\n[nope]\nx = 1\n").find("test.ini:2: unknown section [nope]") != std::string::npos);
  CHECK(error_of("[scenario]\n\nn_sld = two\n").find("test.ini:3") != std::string::npos);
  CHECK(error_of("[phy]\nr_su = -5\n").find("r_su") != std::string::npos);
}

TEST_CASE("write then parse round-trips") {
  ScenarioConfig c;
  c.n_mld = 5;
  c.n_sld = 6;
  c.gamma = 0.4;
  c.phy.n_a = 91;
  c.phy.r_su = 4947.609519958496;
  std::ostringstream out;
  write_config(out, c);
  const ScenarioConfig r = parse(out.str());
  CHECK(r.n_mld == 5);
  CHECK(r.n_sld == 6);
  REQUIRE(r.gamma);
  CHECK(*r.gamma == 0.4);
  CHECK(r.phy.n_a == 91);
  CHECK(r.phy.r_su == c.phy.r_su);

  c.gamma.reset();
  std::ostringstream out2;
  write_config(out2, c);
  CHECK(parse(out2.str()).gamma_is_auto());
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"default.ini", "calibrated_joint.ini"}) {
    const ScenarioConfig c = load_config(std::string(MLO_SOURCE_DIR) + "/configs/" + name);
    CHECK(c.n_mld == 2);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/x.ini"), ConfigError);
}
