#include "mlo/errors.hpp"
#include "mlo/params.hpp"

#include <doctest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cmath>

using namespace mlo;

TEST_CASE("t_data rounds the symbol count up") {
  CHECK(compute_t_data(40, 12000, 12000, 13.6) == doctest::Approx(53.6));
  CHECK(compute_t_data(40, 12001, 12000, 13.6) == doctest::Approx(67.2));
  CHECK_THROWS_AS(compute_t_data(40, 12000, 0, 13.6), ModelError);
}

TEST_CASE("t_data of a calibrated profile matches a hand evaluation") {
  PhyParams phy;
  phy.n_a = 91;
  phy.r_su = 4947.6;
  // 91 MPDUs of 1536 bytes = 1118208 bits; 1118208 / 4947.6 = 226.01 -> 227 symbols
  CHECK(compute_t_data(phy) == doctest::Approx(40 + 227 * 13.6));
}

TEST_CASE("slot durations") {
  PhyParams phy;
  phy.t_phy = 1;
  phy.r_su = 1e9;
  phy.sigma = 99;  // one symbol: t_data = 100
  SlotDurations d = compute_slot_durations(phy);
  REQUIRE(d.t_data == doctest::Approx(100));
  CHECK(d.t_success == doctest::Approx(164));
  CHECK(d.t_collision == doctest::Approx(116));
  CHECK(d.t_empty == doctest::Approx(9));

  phy.sifs = 0;
  phy.t_ack = 0;
  d = compute_slot_durations(phy);
  CHECK(d.t_success == doctest::Approx(d.t_data));
  CHECK(d.t_collision == doctest::Approx(d.t_data));
}

TEST_CASE("t_success - t_collision = sifs + t_ack for random profiles") {
  boost::random::mt19937_64 rng(7);
  boost::random::uniform_real_distribution<double> u(0.5, 200.0);
  for (int i = 0; i < 500; ++i) {
    PhyParams phy;
    phy.t_phy = u(rng);
    phy.sigma = u(rng);
    phy.r_su = 10 * u(rng);
    phy.sifs = u(rng);
    phy.t_ack = u(rng);
    phy.n_a = 1 + i % 64;
    const SlotDurations d = compute_slot_durations(phy);
    CHECK(d.t_success - d.t_collision == doctest::Approx(phy.sifs + phy.t_ack));
    CHECK(d.t_data >= phy.t_phy);
  }
}

TEST_CASE("scenario validation and gamma") {
  ScenarioConfig c;
  CHECK(c.gamma_is_auto());
  CHECK(c.effective_gamma() == doctest::Approx(0.5));
  c.n_mld = 1;
  c.n_sld = 3;
  CHECK(c.effective_gamma() == doctest::Approx(0.25));
  c.validate();

  ScenarioConfig bad = c;
  bad.links = 3;
  CHECK_THROWS_AS(bad.validate(), ModelError);
  bad = c;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(bad.validate(), ModelError);
  bad = c;
  bad.n_mld = 0;
  bad.gamma = 0.3;
  CHECK_THROWS_AS(bad.validate(), ModelError);
  bad = c;
  bad.backoff.w0 = 1;
  CHECK_THROWS_AS(bad.validate(), ModelError);
  bad = c;
  bad.phy.sigma = -1;
  CHECK_THROWS_AS(bad.validate(), ModelError);
}

TEST_CASE("to_ns") {
  CHECK(to_ns(9.0) == 9000);
  CHECK(to_ns(13.6) == 13600);
  CHECK(to_ns(0.0004) == 0);
}
