#include "mlo/calibration.hpp"
#include "mlo/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace mlo;

TEST_CASE("r_su fit reproduces the legacy uplink anchor at fixed n_a") {
  ScenarioConfig base;
  base.phy.n_a = 64;
  const double r = fit_r_su(base, 2, 150.0);
  ScenarioConfig c = base;
  c.n_mld = c.n_sld = 2;
  c.phy.r_su = r;
  // one data symbol more or less moves the result by about 1 / symbols
  const double symbols = std::ceil(c.phy.l_ampdu() / r);
  CHECK(analyze(c).s_u_sld == doctest::Approx(150.0).epsilon(1.0 / symbols));
}

TEST_CASE("calibration with the downlink anchor disabled keeps n_a") {
  ScenarioConfig base;
  base.phy.n_a = 40;
  CalibrationTarget t;
  t.s_u_sld = 120.0;
  t.s_d_sld = 0.0;
  const CalibrationResult r = calibrate(base, t);
  CHECK(r.phy.n_a == 40);
  const double symbols = std::ceil(r.phy.l_ampdu() / r.phy.r_su);
  CHECK(r.at_anchor.s_u_sld == doctest::Approx(120.0).epsilon(1.0 / symbols));
}

TEST_CASE("unreachable anchors are reported") {
  ScenarioConfig base;
  base.phy.n_a = 1;
  CHECK_THROWS_AS(fit_r_su(base, 2, 1e6), ModelError);
}
