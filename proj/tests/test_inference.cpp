#include <catch2/catch_amalgamated.hpp>

#include "crt/crt.hpp"
#include "test_support.hpp"

using Catch::Approx;
using namespace crt;

TEST_CASE("normal_quantile frozen values") {
    REQUIRE(normal_quantile(0.5) == Approx(0.0).margin(1e-12));
    REQUIRE(normal_quantile(0.975) == Approx(1.95996398).margin(1e-6));
    REQUIRE(normal_quantile(0.995) == Approx(2.57582930).margin(1e-6));
}

TEST_CASE("normal_quantile agrees with the series-CDF bisection oracle") {
    for (double p : {1e-6, 1e-4, 0.01, 0.02425, 0.1, 0.3, 0.5, 0.69, 0.84, 0.975, 0.995,
                     0.9999, 1.0 - 1e-6}) {
        REQUIRE(normal_quantile(p) == Approx(support::bisect_normal_quantile(p)).margin(1e-8));
    }
}

TEST_CASE("normal_quantile symmetry") {
    for (double p : {0.001, 0.05, 0.21, 0.37, 0.49}) {
        REQUIRE(normal_quantile(p) == Approx(-normal_quantile(1.0 - p)).margin(1e-12));
    }
}

TEST_CASE("normal_quantile domain") {
    REQUIRE_THROWS_AS(normal_quantile(0.0), DomainError);
    REQUIRE_THROWS_AS(normal_quantile(1.0), DomainError);
    REQUIRE_THROWS_AS(normal_quantile(-0.1), DomainError);
}

TEST_CASE("confidence_interval hand examples") {
    const auto [lo, hi] = confidence_interval(1.75, 4.0, 100, 0.05);
    REQUIRE(lo == Approx(1.358).margin(1e-3));
    REQUIRE(hi == Approx(2.142).margin(1e-3));

    const auto [dlo, dhi] = confidence_interval(3.0, 0.0, 10, 0.05);
    REQUIRE(dlo == Approx(3.0));
    REQUIRE(dhi == Approx(3.0));

    const auto [alo, ahi] = confidence_interval(0.0, 1.0, 1, 0.32);
    REQUIRE(ahi == Approx(0.9945).margin(1e-4));
    REQUIRE(alo == Approx(-0.9945).margin(1e-4));
}

TEST_CASE("confidence_interval shape properties") {
    const auto [lo, hi] = confidence_interval(2.0, 5.0, 40, 0.05);
    REQUIRE(hi - 2.0 == Approx(2.0 - lo).margin(1e-12));  // symmetric

    const auto [lo_bigger_g, hi_bigger_g] = confidence_interval(2.0, 5.0, 400, 0.05);
    REQUIRE(hi_bigger_g - lo_bigger_g < hi - lo);  // narrower with more clusters

    const auto [lo_bigger_v, hi_bigger_v] = confidence_interval(2.0, 9.0, 40, 0.05);
    REQUIRE(hi_bigger_v - lo_bigger_v > hi - lo);  // wider with more variance
}

TEST_CASE("confidence_interval rejects bad inputs") {
    REQUIRE_THROWS_AS(confidence_interval(0.0, -1.0, 10, 0.05), DegenerateVariance);
    REQUIRE_THROWS_AS(confidence_interval(0.0, 1.0, 0, 0.05), DomainError);
    REQUIRE_THROWS_AS(confidence_interval(0.0, 1.0, 10, 0.0), DomainError);
    REQUIRE_THROWS_AS(confidence_interval(0.0, 1.0, 10, 1.0), DomainError);
}
