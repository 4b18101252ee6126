#include <doctest.h>

#include <cmath>
#include <limits>

#include "owcsim/angles.hpp"
#include "owcsim/rng.hpp"

using namespace owcsim;

TEST_SUITE("angles") {

TEST_CASE("wrap_angle canonical examples") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(wrap_angle(6.2) == doctest::Approx(6.2 - kTwoPi).epsilon(1e-12));
  CHECK(wrap_angle(6.2) == doctest::Approx(-0.08319).epsilon(1e-4));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
}

TEST_CASE("wrap_angle rejects non-finite input") {
  CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::infinity()), std::invalid_argument);
  CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
}

TEST_CASE("wrap_angle is idempotent and range-correct") {
  RandomSource rng(7, 0);
  for (int i = 0; i < 2000; ++i) {
    const double a = rng.uniform(-50.0, 50.0);
    const double w = wrap_angle(a);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(wrap_angle(w) == w);
    // congruent mod 2*pi
    CHECK(std::remainder(a - w, kTwoPi) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("angle_diff examples") {
  CHECK(angle_diff(1.0, 1.0) == 0.0);
  CHECK(angle_diff(3.1, -3.1) == doctest::Approx(6.2 - kTwoPi).epsilon(1e-12));
  CHECK(angle_diff(-kHalfPi, kHalfPi) == doctest::Approx(kPi));
  CHECK_THROWS_AS(angle_diff(1.0, std::numeric_limits<double>::quiet_NaN()),
                  std::invalid_argument);
}

TEST_CASE("angle_diff antisymmetry away from the pi boundary") {
  RandomSource rng(11, 0);
  for (int i = 0; i < 2000; ++i) {
    const double a = rng.uniform(-kPi, kPi);
    const double b = rng.uniform(-kPi, kPi);
    const double d = angle_diff(a, b);
    if (std::abs(std::abs(d) - kPi) < 1e-9) continue;  // both map to +pi
    CHECK(angle_diff(b, a) == doctest::Approx(-d).epsilon(1e-12));
  }
}

}  // TEST_SUITE
