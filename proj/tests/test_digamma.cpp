#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <numbers>

#include "data/digamma_reference.hpp"
#include "spn/digamma.hpp"

using spn::digamma;
using spn::testing::kDigammaReference;

TEST_CASE("digamma matches the high-precision reference table") {
  for (const auto& ref : kDigammaReference) {
    INFO("x = " << ref.x);
    CHECK(std::abs(digamma(ref.x) - ref.psi) <= 1e-12);
  }
}

TEST_CASE("digamma special values and identities") {
  CHECK(digamma(1.0) == doctest::Approx(-std::numbers::egamma).epsilon(1e-15));
  CHECK(digamma(0.5) == doctest::Approx(-std::numbers::egamma - 2 * std::numbers::ln2).epsilon(1e-15));
  // psi(x + 1) = psi(x) + 1/x
  for (double x : {0.01, 0.3, 1.7, 5.5, 9.5, 42.0, 1e4})
    CHECK(digamma(x + 1) - digamma(x) == doctest::Approx(1 / x).epsilon(1e-12));
}

TEST_CASE("digamma is undefined on the non-positive axis") {
  CHECK(std::isnan(digamma(0.0)));
  CHECK(std::isnan(digamma(-1.5)));
  CHECK(std::isnan(digamma(std::nan(""))));
}
