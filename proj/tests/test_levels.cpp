#include <algorithm>
#include <random>

#include "doctest.h"
#include "shb/levels.hpp"

using namespace shb;

TEST_CASE("zeeman splitting") {
  ZeemanConfig z;
  z.field_mT = 0.0;
  CHECK(zeeman_splitting(8.0, z) == 0.0);

  z.field_mT = 1.2;
  // 13.996 * 12 = 167.952; * 1.2 = 201.5424
  CHECK(ground_splitting(z) == doctest::Approx(201.5424).epsilon(1e-12));
  CHECK(ground_splitting(z) == doctest::Approx(201.5).epsilon(1e-3));
  CHECK(excited_splitting(z) == doctest::Approx(134.3616).epsilon(1e-12));
}

TEST_CASE("field for a 60 MHz splitting difference") {
  ZeemanConfig z;
  const double b = 60.0 / (kBohrMHzPerMilliTesla * 4.0);
  CHECK(b == doctest::Approx(1.07).epsilon(2e-3));
  z.field_mT = b;
  CHECK(ground_splitting(z) - excited_splitting(z) == doctest::Approx(60.0));
}

TEST_CASE("transition set") {
  ZeemanConfig z;
  SUBCASE("zero field collapses all lines") {
    const auto s = transition_set(42.0, z);
    for (auto t : kAllTransitions) CHECK(s[t] == 42.0);
  }
  SUBCASE("180 / 120 MHz splittings") {
    z.g_ground = 180.0;
    z.g_excited = 120.0;
    z.bohr_MHz_per_mT = 1.0;
    z.field_mT = 1.0;
    const auto s = transition_set(0.0, z);
    CHECK(s[Transition::kG1E1] == 0.0);
    CHECK(s[Transition::kG1E2] == 120.0);
    CHECK(s[Transition::kG2E1] == -180.0);
    CHECK(s[Transition::kG2E2] == -60.0);
  }
  SUBCASE("antihole of transition 1 pumping sits at -(dg - de)") {
    z.field_mT = 1.2;
    const auto s = transition_set(7.0, z);
    CHECK(s[Transition::kG2E2] == doctest::Approx(7.0 - (ground_splitting(z) - excited_splitting(z))));
  }
}

TEST_CASE("transition set spacings hold for random configs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    ZeemanConfig z;
    z.field_mT = 5.0 * u(rng);
    z.g_ground = 0.1 + 20.0 * u(rng);
    z.g_excited = 0.1 + 20.0 * u(rng);
    const double c = -1000.0 + 2000.0 * u(rng);
    const auto s = transition_set(c, z);
    const double dg = ground_splitting(z), de = excited_splitting(z);
    CHECK(s[Transition::kG1E1] == c);
    CHECK(s[Transition::kG1E2] - s[Transition::kG1E1] == doctest::Approx(de));
    CHECK(s[Transition::kG1E1] - s[Transition::kG2E1] == doctest::Approx(dg));
    CHECK(s[Transition::kG2E2] - s[Transition::kG2E1] == doctest::Approx(de));
    CHECK(s[Transition::kG1E2] - s[Transition::kG2E2] == doctest::Approx(dg));
  }
}

TEST_CASE("transition labels") {
  CHECK(ground_of(Transition::kG2E1) == 1);
  CHECK(excited_of(Transition::kG2E1) == 0);
  CHECK(ground_of(Transition::kG1E2) == 0);
  CHECK(excited_of(Transition::kG1E2) == 1);
}

TEST_CASE("effective lifetime") {
  RateParams p;
  p.t1_ms = 11.0;
  p.beta = 0.9;
  CHECK(effective_lifetime(p) == doctest::Approx(110.0).epsilon(1e-12));
  p.beta = 0.0;
  CHECK(effective_lifetime(p) == 11.0);
  p.beta = 0.95;
  CHECK(effective_lifetime(p) == doctest::Approx(220.0).epsilon(1e-12));
  p.beta = 1.0;
  CHECK_THROWS_AS(effective_lifetime(p), NoDecayChannelError);
}

TEST_CASE("parameter validity") {
  RateParams p;
  CHECK(p.valid());
  p.beta = 1.2;
  CHECK_FALSE(p.valid());
  p = RateParams{};
  p.persistent_fraction = 1.0;
  CHECK_FALSE(p.valid());
  ZeemanConfig z;
  z.field_mT = -1.0;
  CHECK_FALSE(z.valid());
}

TEST_CASE("templated on scalar") {
  ZeemanConfigT<float> z;
  z.field_mT = 1.2f;
  CHECK(ground_splitting(z) == doctest::Approx(201.5424f).epsilon(1e-5));
}
