#include <doctest.h>

#include <cmath>

#include "cerebra/atrophy.hpp"

using namespace cerebra;

namespace {

RegionParams grey_region() {
  return {32.33, 1.0, -6.0e-3, -6.0e-3, Tissue::Grey};
}

}  // namespace

TEST_CASE("gamma: midpoint, saturation, and baseline") {
  const BioParams bio;
  const RegionParams grey = grey_region();
  CHECK(gamma(bio.c_crit_tau, grey, bio) == 0.5);  // sigmoid midpoint is exact
  CHECK(gamma(1.0, grey, bio) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(gamma(0.0, grey, bio) == doctest::Approx(2.0611536181902037e-9).epsilon(1e-6));
}

TEST_CASE("gamma: monotone, bounded by Gc/G0, scaled by the rate ratio") {
  const BioParams bio;
  RegionParams r = grey_region();
  r.Gc = -12.0e-3;  // Gc/G0 = 2
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double c = i / 100.0;
    const double g = gamma(c, r, bio);
    CHECK(g >= prev);
    CHECK(g >= 0.0);
    CHECK(g <= 2.0);
    prev = g;
  }
  CHECK(gamma(bio.c_crit_tau, r, bio) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gamma: fluid regions and degenerate rates") {
  const BioParams bio;
  RegionParams fluid{7.22, 14.43, 0.0, 0.0, Tissue::Fluid};
  CHECK(gamma(0.9, fluid, bio) == 0.0);

  RegionParams dead = grey_region();
  dead.G0 = 0.0;
  dead.Gc = 0.0;
  CHECK(gamma(0.9, dead, bio) == 0.0);
  dead.Gc = -1e-3;
  CHECK_THROWS_AS(gamma(0.9, dead, bio), ValidationError);
}

TEST_CASE("step_theta: healthy grey over 20 years") {
  const BioParams bio;
  RegionParams grey = grey_region();
  grey.Gc = 0.0;  // healthy scenario: no accelerated contribution
  double theta = 1.0;
  const double dt = 0.05;
  for (int i = 0; i < 400; ++i) theta = step_theta(theta, 0.0, dt, grey, bio);
  CHECK(theta == doctest::Approx(1.0 + 20.0 * (-6.0e-3)).epsilon(1e-12));
  CHECK(theta == doctest::Approx(0.880).epsilon(1e-12));
}

TEST_CASE("step_theta: saturated tau doubles the grey rate") {
  const BioParams bio;
  const RegionParams grey = grey_region();
  double theta = 1.0;
  for (int i = 0; i < 200; ++i) theta = step_theta(theta, 1.0, 0.05, grey, bio);
  // gamma(1) = 1 to ~1e-35, so theta = 1 + 10 * 2 * G0.
  CHECK(theta == doctest::Approx(0.880).epsilon(1e-10));
}

TEST_CASE("step_theta: fluid never atrophies") {
  const BioParams bio;
  const RegionParams fluid{1.66, 0.5, 0.0, 0.0, Tissue::Fluid};
  CHECK(step_theta(1.0, 1.0, 100.0, fluid, bio) == 1.0);
}

TEST_CASE("step_theta: exact linear closed form for constant tau") {
  const BioParams bio;
  const RegionParams grey = grey_region();
  for (double c : {0.0, 0.1, 0.2, 0.35, 0.9}) {
    const double g = gamma(c, grey, bio);
    double theta = 1.0;
    const double dt = 0.025;
    const int n = 200;
    for (int i = 0; i < n; ++i) theta = step_theta(theta, c, dt, grey, bio);
    const double closed = 1.0 + (1.0 + g) * grey.G0 * (n * dt);
    CHECK(theta == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("step_theta: monotone non-increasing, floored") {
  const BioParams bio;
  const RegionParams grey = grey_region();
  double theta = 1.0;
  double prev = theta;
  for (int i = 0; i < 5000; ++i) {
    theta = step_theta(theta, 0.5, 0.1, grey, bio);
    CHECK(theta <= prev);
    CHECK(theta >= bio.theta_floor);
    prev = theta;
  }
  CHECK(theta == bio.theta_floor);  // long horizon pins at the floor
}

TEST_CASE("step_theta: optional relaxation term resists atrophy") {
  BioParams bio;
  const RegionParams grey = grey_region();
  const double plain = step_theta(0.9, 0.5, 0.1, grey, bio);
  bio.k_theta = 0.05;
  bio.eta_theta = 1.0;
  const double relaxed = step_theta(0.9, 0.5, 0.1, grey, bio);
  CHECK(relaxed > plain);  // -(k/eta)(theta-1) > 0 below theta = 1
}
