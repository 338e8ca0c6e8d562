#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chargeopt/normal.hpp"

using namespace chargeopt;
using doctest::Approx;

// Reference values computed with 25-digit arithmetic.
TEST_CASE("standard normal cdf against frozen references") {
    CHECK(standard_normal_cdf(0.0) == 0.5);
    CHECK(standard_normal_cdf(0.5) == Approx(0.6914624612740131036).epsilon(1e-14));
    CHECK(standard_normal_cdf(1.0) == Approx(0.8413447460685429486).epsilon(1e-14));
    CHECK(standard_normal_cdf(-1.5) == Approx(0.0668072012688580660).epsilon(1e-13));
    CHECK(standard_normal_cdf(2.0) == Approx(0.9772498680518207928).epsilon(1e-14));
    CHECK(standard_normal_cdf(-2.0) == Approx(0.0227501319481792072).epsilon(1e-13));
    CHECK(standard_normal_cdf(3.0) == Approx(0.9986501019683699055).epsilon(1e-14));
    CHECK(standard_normal_cdf(-4.0) == Approx(3.16712418331199213e-5).epsilon(1e-12));
    CHECK(standard_normal_cdf(6.0) == Approx(0.9999999990134123550).epsilon(1e-15));
}

TEST_CASE("erf against frozen references") {
    CHECK(erf_cody(0.0) == 0.0);
    CHECK(erf_cody(0.5) == Approx(0.5204998778130465377).epsilon(1e-14));
    CHECK(erf_cody(1.25) == Approx(0.9229001282564582301).epsilon(1e-14));
    CHECK(erfc_cody(2.5) == Approx(4.069520174449589396e-4).epsilon(1e-13));
    CHECK(erfc_cody(9.0) == Approx(4.137031746513810238e-37).epsilon(1e-13));
}

TEST_CASE("erf agrees with the C library on a dense grid") {
    for (int i = -600; i <= 600; ++i) {
        const double x = i / 100.0;
        CHECK(erf_cody(x) == Approx(std::erf(x)).epsilon(2e-15));
    }
}

TEST_CASE("cdf identities") {
    for (int i = 0; i <= 80; ++i) {
        const double x = i / 10.0;
        const double hi = standard_normal_cdf(x);
        const double lo = standard_normal_cdf(-x);
        CHECK(hi + lo == Approx(1.0).epsilon(1e-15));
        CHECK(hi >= 0.5);
        CHECK(lo <= 0.5);
    }

    // Monotone on a fine grid through the tails.
    double prev = -1.0;
    for (int i = -900; i <= 900; ++i) {
        const double v = standard_normal_cdf(i / 100.0);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("cdf saturates exactly past +/-8") {
    CHECK(standard_normal_cdf(-8.5) == 0.0);
    CHECK(standard_normal_cdf(8.5) == 1.0);
    CHECK(standard_normal_cdf(-1e300) == 0.0);
    CHECK(standard_normal_cdf(1e300) == 1.0);
}
