#include <doctest.h>

#include "verimap/stats/special.hpp"

using namespace verimap::stats;

// Reference values computed independently with scipy 1.x.
TEST_CASE("normal cdf") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(norm_cdf(-3.0) == doctest::Approx(0.0013498980316300933).epsilon(1e-12));
    CHECK(norm_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
    CHECK(norm_cdf(0.5) == doctest::Approx(0.6914624612740131).epsilon(1e-12));
    CHECK(norm_cdf(2.0) == doctest::Approx(0.9772498680518208).epsilon(1e-12));
    CHECK(norm_sf(5.0) == doctest::Approx(1.0 - 0.9999997133484281).epsilon(1e-6));
}

TEST_CASE("normal ppf inverts the cdf") {
    for (double p : {1e-8, 0.001, 0.025, 0.3, 0.5, 0.8, 0.975, 0.999, 1 - 1e-8}) {
        CHECK(norm_cdf(norm_ppf(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(norm_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("chi-square upper tail") {
    CHECK(chi2_sf(2.4, 1) == doctest::Approx(0.12133525035848208).epsilon(1e-12));
    CHECK(chi2_sf(3.8415, 1) == doctest::Approx(0.049998772071222324).epsilon(1e-10));
    CHECK(chi2_sf(12.59, 6) == doctest::Approx(0.05002901173891519).epsilon(1e-10));
    CHECK(chi2_sf(0.5, 3) == doctest::Approx(0.9188914116546758).epsilon(1e-12));
    CHECK(chi2_sf(2577.0, 6) == doctest::Approx(0.0).epsilon(1e-300));
    CHECK(chi2_sf(0.0, 1) == 1.0);
}

TEST_CASE("student t upper tail") {
    CHECK(t_sf(2.101, 18) == doctest::Approx(0.02499618143898176).epsilon(1e-10));
    CHECK(t_sf(1.0, 5) == doctest::Approx(0.18160873382456127).epsilon(1e-10));
    CHECK(t_sf(2.776, 4) == doctest::Approx(0.0250113891599882).epsilon(1e-10));
    CHECK(t_sf(0.0, 10) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(t_sf(-1.0, 5) == doctest::Approx(1.0 - 0.18160873382456127).epsilon(1e-10));
    CHECK(t_sf_two_sided(2.101, 18) == doctest::Approx(2 * 0.02499618143898176).epsilon(1e-10));
}

TEST_CASE("t quantile matches scipy") {
    CHECK(t_ppf_975(3) == doctest::Approx(3.182446305284263).epsilon(1e-8));
    CHECK(t_ppf_975(10) == doctest::Approx(2.2281388519649385).epsilon(1e-8));
    CHECK(t_ppf_975(18) == doctest::Approx(2.10092204024096).epsilon(1e-8));
    CHECK(t_ppf_975(30) == doctest::Approx(2.0422724563012373).epsilon(1e-8));
}

TEST_CASE("incomplete gamma complementarity") {
    for (double a : {0.5, 1.0, 3.0, 10.0, 50.0}) {
        for (double x : {0.1, 0.9, 2.5, 12.0, 80.0}) {
            CHECK(gamma_p(a, x) + gamma_q(a, x) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}
