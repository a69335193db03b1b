#include "mlo/ap_chain.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

using namespace mlo;

namespace {

ApChainInputs<double> inputs(double pm, double ps, double x, double g, int w0, int m) {
  ApChainInputs<double> in;
  in.p_ap_mld = pm;
  in.p_ap_sld = ps;
  in.x_ap = x;
  in.gamma = g;
  in.backoff.w0 = w0;
  in.backoff.m = m;
  return in;
}

} // namespace

TEST_CASE("X = 0 empties the restart states") {
  const auto in = inputs(0, 0, 0, 0.5, 16, 6);
  const auto d = ap_stationary(in);
  CHECK(d.b_mld_prime.abs().maxCoeff() == 0.0);
  for (int k = 1; k < 16; ++k) CHECK(d.b_mld(0, k) == doctest::Approx((16.0 - k) / 16 * d.b_mld(0, 0)));
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
  const auto t = ap_tau(in);
  CHECK(t.tau_ap_mld == doctest::Approx(t.tau_ap_sld).epsilon(1e-12));
}

TEST_CASE("gamma = 1 routes everything to the MLO part") {
  const auto in = inputs(0.2, 0.3, 0.4, 1.0, 16, 4);
  const auto d = ap_stationary(in);
  CHECK(d.b_sld.abs().maxCoeff() == 0.0);
  CHECK(ap_tau(in).tau_ap_sld == 0.0);
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
  // approaching from below is continuous
  const auto near = ap_tau(inputs(0.2, 0.3, 0.4, 1 - 1e-9, 16, 4));
  CHECK(near.tau_ap_sld < 1e-8);
  CHECK(near.tau_ap_mld == doctest::Approx(ap_tau(in).tau_ap_mld).epsilon(1e-7));
}

TEST_CASE("closed form matches the transition-matrix oracle") {
  const auto in = inputs(0.2, 0.25, 0.3, 0.4, 16, 3);
  const auto d = ap_stationary(in);
  const auto o = oracle::ap_chain(0.2, 0.25, 0.3, 0.4, 16, 3);
  for (int i = 0; i <= 3; ++i) {
    for (long k = 0; k < in.backoff.window(i); ++k) {
      CHECK(d.b_mld(i, k) == doctest::Approx(o.b_mld(i, k)).epsilon(1e-8));
      CHECK(d.b_sld(i, k) == doctest::Approx(o.b_sld(i, k)).epsilon(1e-8));
    }
    CHECK(d.b_mld_prime(i) == doctest::Approx(o.prime(i)).epsilon(1e-8));
  }
  const auto t = ap_tau(in);
  CHECK(std::abs(t.tau_ap_mld - o.tau_mld) < 1e-8);
  CHECK(std::abs(t.tau_ap_sld - o.tau_sld) < 1e-8);
}

TEST_CASE("normalization and range over random inputs") {
  boost::random::mt19937_64 rng(11);
  boost::random::uniform_real_distribution<double> u(0.0, 0.95);
  for (int n = 0; n < 200; ++n) {
    const int w0 = 2 << (n % 5);
    const int m = 1 + n % 7;
    const auto in = inputs(u(rng), u(rng), u(rng), u(rng) / 0.95, w0, m);
    const auto d = ap_stationary(in);
    CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.b_mld.minCoeff() >= 0.0);
    CHECK(d.b_sld.minCoeff() >= 0.0);
    CHECK(d.b_mld.maxCoeff() <= 1.0);
    // geometric decay of the stage heads
    for (int i = 1; i < m; ++i)
      CHECK(d.b_mld(i, 0) == doctest::Approx(in.p_ap_mld * d.b_mld(i - 1, 0)).epsilon(1e-12));
  }
}

TEST_CASE("inputs outside the domain are rejected") {
  CHECK_THROWS_AS(ap_stationary(inputs(1.0, 0.1, 0.1, 0.5, 16, 3)), SingularModelError);
  CHECK_THROWS_AS(ap_stationary(inputs(0.1, 0.1, 1.0, 0.5, 16, 3)), SingularModelError);
  CHECK_THROWS_AS(ap_stationary(inputs(0.1, 0.1, 0.1, 1.5, 16, 3)), ModelError);
  CHECK_THROWS_AS(ap_stationary(inputs(-0.1, 0.1, 0.1, 0.5, 16, 3)), ModelError);
}
