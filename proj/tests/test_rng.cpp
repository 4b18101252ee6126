#include <doctest.h>

#include <cmath>

#include "owcsim/rng.hpp"

using namespace owcsim;

TEST_SUITE("rng") {

TEST_CASE("identical (seed, stream) replays the identical sequence") {
  RandomSource a(42, 0);
  RandomSource b(42, 0);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("distinct streams differ") {
  RandomSource a(42, 0);
  RandomSource b(42, 1);
  int identical = 0;
  for (int i = 0; i < 1000; ++i) {
    if (a.next_u64() == b.next_u64()) ++identical;
  }
  CHECK(identical < 5);
}

TEST_CASE("distinct seeds differ") {
  RandomSource a(1, 3);
  RandomSource b(2, 3);
  int identical = 0;
  for (int i = 0; i < 1000; ++i) {
    if (a.next_u64() == b.next_u64()) ++identical;
  }
  CHECK(identical < 5);
}

TEST_CASE("standard normal mean over 1e6 draws") {
  RandomSource rng(42, 0);
  double sum = 0.0;
  double sum_sq = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.005);
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("uniform stays in [0, 1) and is roughly uniform") {
  RandomSource rng(9, 2);
  int below_half = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    if (u < 0.5) ++below_half;
  }
  CHECK(std::abs(below_half / static_cast<double>(n) - 0.5) < 0.01);
}

TEST_CASE("uniform_below is in range and hits all residues") {
  RandomSource rng(5, 1);
  bool seen[7] = {};
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.uniform_below(7);
    CHECK(v < 7);
    seen[v] = true;
  }
  for (bool s : seen) CHECK(s);
}

TEST_CASE("exponential has the requested mean") {
  RandomSource rng(13, 4);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += rng.exponential(2.5);
  CHECK(sum / n == doctest::Approx(2.5).epsilon(0.02));
}

}  // TEST_SUITE
