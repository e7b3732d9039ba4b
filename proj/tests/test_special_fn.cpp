#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qmm/special_fn.hpp"

using namespace qmm;

namespace {

// 50-digit erfc evaluations, Q(x) = erfc(x/sqrt 2)/2
struct Ref {
    double x, q;
};
const Ref kQ[] = {
    {0.0, 0.5},
    {0.05, 4.800611941616275384e-1},
    {0.25, 4.0129367431707627576e-1},
    {0.5, 3.0853753872598689636e-1},
    {0.75, 2.2662735237686819933e-1},
    {1.0, 1.5865525393145705141e-1},
    {1.25, 1.0564977366685525769e-1},
    {1.5, 6.6807201268858066004e-2},
    {2.0, 2.27501319481792072e-2},
    {2.5, 6.209665325776135167e-3},
    {3.0, 1.3498980316300945267e-3},
    {4.0, 3.1671241833119921254e-5},
    {5.0, 2.8665157187919391167e-7},
    {6.0, 9.865876450376981407e-10},
    {8.0, 6.2209605742717841235e-16},
    {10.0, 7.619853024160526066e-24},
    {15.0, 3.6709661993127508858e-51},
    {20.0, 2.7536241186062336951e-89},
    {30.0, 4.9067139271481870595e-198},
    {37.0, 5.7255712225245768227e-300},
};

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST_CASE("q against high-precision reference values") {
    for (const Ref& r : kQ) {
        CAPTURE(r.x);
        CHECK(rel(q(r.x), r.q) <= 1e-14);
    }
    CHECK(q(0.0) == 0.5);
}

TEST_CASE("q rejects negative and non-finite input") {
    CHECK_THROWS_AS(q(-1.0), std::domain_error);
    CHECK_THROWS_AS(q(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
    CHECK_THROWS_AS(q(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("q beyond the normal range flushes to tiny values") {
    CHECK(q(39.0) >= 0.0);
    CHECK(q(39.0) < 1e-300);
    CHECK(q(60.0) == 0.0);
}

TEST_CASE("q is strictly decreasing on [0, 37]") {
    double prev = q(0.0);
    for (int i = 1; i <= 3700; ++i) {
        const double v = q(i * 0.01);
        REQUIRE(v < prev);
        prev = v;
    }
}

TEST_CASE("reflection: 1 - q(x) is the left tail") {
    CHECK(rel(1.0 - q(0.3), 0.61791142218895263731) <= 1e-14);
    CHECK(rel(1.0 - q(1.0), 0.84134474606854294859) <= 1e-14);
    CHECK(rel(1.0 - q(2.5), 0.99379033467422386483) <= 1e-14);
}

TEST_CASE("q_prime") {
    CHECK(q_prime(0.0) == doctest::Approx(-0.3989422804014327).epsilon(1e-15));
    CHECK(q_prime(1.0) == doctest::Approx(-0.24197072451914337).epsilon(1e-15));
    CHECK_THROWS_AS(q_prime(std::numeric_limits<double>::infinity()), std::domain_error);
    const double h = 1e-5;
    CHECK(rel(q_prime(0.7), (q(0.7 + h) - q(0.7 - h)) / (2 * h)) <= 1e-6);
    for (int i = 0; i <= 59; ++i) {
        const double x = 0.1 + i * 0.1;
        CAPTURE(x);
        CHECK(q_prime(x) <= 0.0);
        CHECK(rel(q_prime(x), (q(x + h) - q(x - h)) / (2 * h)) <= 1e-6);
    }
}

TEST_CASE("Craig oracle") {
    CHECK(q_craig_oracle(0.0, 4) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(q_craig_oracle(0.0, 64) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rel(q_craig_oracle(1.0, 64), q(1.0)) <= 1e-12);
    CHECK_THROWS_AS(q_craig_oracle(1.0, 3), std::invalid_argument);

    SUBCASE("agrees with q on [0, 8]") {
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double x = 8.0 * i / 999;
            worst = std::max(worst, rel(q_craig_oracle(x, 64), q(x)));
        }
        CHECK(worst <= 1e-12);
    }
    SUBCASE("error at x = 3 shrinks with nodes") {
        const double ref = q(3.0);
        double prev = std::fabs(q_craig_oracle(3.0, 4) - ref);
        CHECK(prev > 1e-9);
        for (int n : {5, 6, 8}) {
            const double d = std::fabs(q_craig_oracle(3.0, n) - ref);
            CHECK(d < prev);
            prev = d;
        }
    }
}
