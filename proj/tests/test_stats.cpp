#include "doctest.h"

#include <cmath>
#include <vector>

#include "ptsa/stats.hpp"

using namespace ptsa::stats;

// Reference values below were produced with an independent implementation
// (scipy.stats, double precision) and are frozen here.

TEST_CASE("standard normal cdf matches reference values") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_cdf(0.5) == doctest::Approx(0.6914624612740131).epsilon(1e-13));
    CHECK(norm_cdf(1.5) == doctest::Approx(0.9331927987311419).epsilon(1e-13));
    CHECK(norm_cdf(2.0) == doctest::Approx(0.9772498680518208).epsilon(1e-13));
    CHECK(norm_cdf(-3.29053) == doctest::Approx(4.999941912701829e-4).epsilon(1e-12));
}

TEST_CASE("normal survival function stays accurate in the deep tail") {
    CHECK(norm_sf(8.0) == doctest::Approx(6.22096057427174e-16).epsilon(1e-12));
    // Symmetry against the cdf where both are well conditioned.
    for (double x : {-2.0, -0.7, 0.0, 0.3, 1.9}) {
        CHECK(norm_sf(x) == doctest::Approx(norm_cdf(-x)).epsilon(1e-13));
    }
}

TEST_CASE("normal quantile matches reference values") {
    CHECK(norm_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(norm_ppf(1e-4) == doctest::Approx(-3.7190164854556804).epsilon(1e-12));
    CHECK(norm_ppf(5e-4) == doctest::Approx(-3.2905267314918945).epsilon(1e-12));
    CHECK(norm_ppf(0.3) == doctest::Approx(-0.5244005127080409).epsilon(1e-12));
    CHECK(norm_ppf(0.04) == doctest::Approx(-1.75068607125217).epsilon(1e-12));
    CHECK(norm_ppf(0.5) == 0.0);
}

TEST_CASE("normal quantile and cdf are inverses") {
    for (double p : {1e-12, 1e-6, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0 - 1e-9}) {
        CHECK(norm_cdf(norm_ppf(p)) == doctest::Approx(p).epsilon(1e-11));
    }
    for (double q : {1e-12, 1e-6, 0.01, 0.4}) {
        CHECK(norm_sf(norm_isf(q)) == doctest::Approx(q).epsilon(1e-11));
    }
}

TEST_CASE("weibull distribution functions") {
    const double scale = 11.2, shape = 2.2;
    // Median of the Weibull wind-speed marginal used throughout.
    CHECK(weibull_ppf(0.5, scale, shape) == doctest::Approx(9.481257889387141).epsilon(1e-13));
    CHECK(weibull_ppf(0.05, scale, shape) == doctest::Approx(2.9032332471133375).epsilon(1e-13));
    CHECK(weibull_ppf(0.95, scale, shape) == doctest::Approx(18.44209668637805).epsilon(1e-13));
    CHECK(weibull_cdf(11.4, scale, shape) == doctest::Approx(0.6464417873044837).epsilon(1e-13));
    CHECK(weibull_cdf(0.0, scale, shape) == 0.0);
    CHECK(weibull_sf(11.4, scale, shape) ==
          doctest::Approx(1.0 - 0.6464417873044837).epsilon(1e-12));
    for (double p : {0.001, 0.1, 0.5, 0.9, 0.999}) {
        CHECK(weibull_cdf(weibull_ppf(p, scale, shape), scale, shape) ==
              doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("kolmogorov survival function") {
    CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-12));
    CHECK(kolmogorov_sf(10.0) == doctest::Approx(0.0).epsilon(1e-30));
    CHECK(kolmogorov_sf(0.05) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two-sample KS test on identical and disjoint samples") {
    std::vector<double> a, b, c;
    for (int i = 0; i < 200; ++i) {
        a.push_back(i * 0.01);
        b.push_back(i * 0.01);
        c.push_back(100.0 + i * 0.01);
    }
    const KsResult same = ks_two_sample(a, b);
    CHECK(same.statistic == doctest::Approx(0.0));
    CHECK(same.p_value == doctest::Approx(1.0).epsilon(1e-9));

    const KsResult disjoint = ks_two_sample(a, c);
    CHECK(disjoint.statistic == doctest::Approx(1.0));
    CHECK(disjoint.p_value < 1e-6);
}

TEST_CASE("mean and sample standard deviation") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(mean(v) == doctest::Approx(2.5));
    CHECK(sample_std(v) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-14));
}
