#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "qmm/baselines.hpp"
#include "qmm/expsum.hpp"
#include "qmm/special_fn.hpp"

using namespace qmm;

namespace {

ExpSum table2_n2() { return ExpSum({3.736889599671366e-1, 1.167651897698837e-1}, {8.179084584179674e-1, 1.645047046852372e+1}); }

ExpSum table2_n3() {
    return ExpSum({3.259195350781647e-1, 1.302528627687561e-1, 4.047435009465072e-2},
                  {7.051797307608448e-1, 5.489376068647640e+0, 1.335391071637174e+2});
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

}  // namespace

TEST_CASE("ExpSum construction") {
    ExpSum s({0.25, 0.5}, {2.0, 1.0});
    CHECK(s.size() == 2);
    CHECK(s.b()[0] == 1.0);  // sorted by b
    CHECK(s.a()[0] == 0.5);
    CHECK(s.sum_a() == 0.75);
    CHECK_THROWS_AS(ExpSum({0.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ExpSum({0.1}, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ExpSum({0.1, 0.2}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ExpSum({0.1, 0.2}, {1.0}), std::invalid_argument);
}

TEST_CASE("eval") {
    CHECK(eval(table2_n2(), 0.0) == doctest::Approx(0.4904541497370203).epsilon(1e-15));
    CHECK(eval(table2_n2(), 30.0) < 1e-300);
    CHECK(eval(chiani_n2(), 0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("eval derivatives") {
    const ExpSum one({1.0}, {1.0});
    CHECK(eval_prime(table2_n2(), 0.0) == 0.0);
    CHECK(eval_prime(one, 1.0) == doctest::Approx(-2.0 / std::exp(1.0)).epsilon(1e-15));
    CHECK(eval_second(one, 0.0) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(eval_second(one, 1.0) == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-15));
    const double h = 1e-5;
    const ExpSum s2 = table2_n2(), s3 = table2_n3();
    CHECK(rel(eval_prime(s2, 1.0), (eval(s2, 1.0 + h) - eval(s2, 1.0 - h)) / (2 * h)) <= 1e-8);
    CHECK(rel(eval_second(s3, 0.5), (eval_prime(s3, 0.5 + h) - eval_prime(s3, 0.5 - h)) / (2 * h)) <= 1e-6);
}

TEST_CASE("target polynomials") {
    CHECK(target_eval(TargetPoly::qam4(), 0.0) == 0.75);
    CHECK(target_eval(TargetPoly::power(3), 0.0) == 0.125);
    for (double x : {0.0, 0.3, 1.0, 4.0, 12.0}) CHECK(target_eval(TargetPoly::identity(), x) == q(x));
    CHECK(TargetPoly::power(3).tail_power() == 3);
    CHECK(TargetPoly::qam4().tail_power() == 1);
    CHECK(TargetPoly::qam4().at_origin() == 0.75);
    CHECK_THROWS(TargetPoly(std::vector<double>{}));
    const double h = 1e-5;
    for (double x : {0.2, 1.0, 2.5}) {
        const TargetPoly t = TargetPoly::qam4();
        CHECK(rel(target_prime(t, x), (target_eval(t, x + h) - target_eval(t, x - h)) / (2 * h)) <= 1e-8);
        CHECK(rel(target_second(t, x), (target_prime(t, x + h) - target_prime(t, x - h)) / (2 * h)) <= 1e-6);
    }
}

TEST_CASE("error functionals") {
    const TargetPoly id = TargetPoly::identity();
    CHECK(error(chiani_n2(), id, ErrorMeasure::absolute, 0.0) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
    CHECK(error(table2_n2(), id, ErrorMeasure::absolute, 0.0) == doctest::Approx(-9.546e-3).epsilon(2e-6 / 9.546e-3));
    CHECK(error(ExpSum({0.5}, {0.5}), id, ErrorMeasure::absolute, 0.0) == 0.0);
    CHECK(error(ExpSum({0.5}, {0.5}), id, ErrorMeasure::relative, 0.0) == 0.0);
    CHECK_THROWS_AS(error(table2_n2(), id, ErrorMeasure::relative, 40.0), std::domain_error);
    CHECK(std::fabs(error(table2_n2(), id, ErrorMeasure::absolute, 30.0)) < 1e-100);
}

TEST_CASE("analytic error derivatives against central differences") {
    std::mt19937_64 rng(7);
    const std::pair<ExpSum, TargetPoly> cases[] = {
        {table2_n2(), TargetPoly::identity()},
        {table2_n3(), TargetPoly::identity()},
        {ExpSum({0.49, 0.16, 0.065}, {0.6, 2.0, 13.0}), TargetPoly::qam4()},
        {ExpSum({0.1, 0.02}, {1.5, 8.0}), TargetPoly::power(3)},
    };
    for (const auto& [s, t] : cases)
        for (ErrorMeasure m : {ErrorMeasure::absolute, ErrorMeasure::relative}) {
            std::uniform_real_distribution<double> U(0.05, 4.0);
            for (int i = 0; i < 50; ++i) {
                const double x = U(rng), h = 1e-5 * (1.0 + x);
                const ErrorValue v = error_all(s, t, m, x);
                const double fd1 = (error(s, t, m, x + h) - error(s, t, m, x - h)) / (2 * h);
                const double fd2 = (error_prime(s, t, m, x + h) - error_prime(s, t, m, x - h)) / (2 * h);
                CAPTURE(x);
                // where a derivative crosses zero, compare against the neighbouring slope scale
                const double s1 = std::max(std::fabs(fd1), std::fabs(v.d2e) * h * 1e3);
                const double s2 = std::max(std::fabs(fd2), std::fabs(fd1) * 1e-3);
                CHECK(std::fabs(v.de - fd1) <= 1e-6 * s1 + 1e-13);
                CHECK(std::fabs(v.d2e - fd2) <= 1e-6 * s2 + 1e-11);
                CHECK(v.e == error(s, t, m, x));
            }
        }
}

TEST_CASE("tail classification") {
    const TargetPoly id = TargetPoly::identity();
    CHECK(tail_class(ExpSum({0.5}, {0.6}), id) == TailClass::converges_to_minus_one);
    CHECK(tail_class(ExpSum({0.3, 0.2}, {0.5, 3.0}), id) == TailClass::diverges);
    CHECK(tail_class(ExpSum({0.1}, {1.4}), TargetPoly::power(3)) == TailClass::diverges);
    CHECK(tail_class(ExpSum({0.1}, {1.6}), TargetPoly::power(3)) == TailClass::converges_to_minus_one);
    CHECK(tail_class(ExpSum({0.5}, {0.6}), id, ErrorMeasure::absolute) == TailClass::converges_to_zero_abs);

    // numerical check of the Q^3 tail: r grows where min b < 3/2
    const ExpSum s({0.1}, {1.4});
    const TargetPoly p3 = TargetPoly::power(3);
    CHECK(error(s, p3, ErrorMeasure::relative, 12.0) > error(s, p3, ErrorMeasure::relative, 8.0));
    CHECK(error(s, p3, ErrorMeasure::relative, 12.0) > 1.0);
}

TEST_CASE("combine_powers") {
    const ExpSum h({0.5}, {0.5});
    const ExpSum sq = combine_powers({{h, 2}});
    REQUIRE(sq.size() == 1);
    CHECK(sq[0].a == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sq[0].b == doctest::Approx(1.0).epsilon(1e-15));

    const ExpSum same = combine_powers({{table2_n3(), 1}});
    REQUIRE(same.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(same[i].b == table2_n3()[i].b);

    SUBCASE("pointwise product identity") {
        const ExpSum s2 = table2_n2(), s3 = table2_n3();
        const ExpSum p = combine_powers({{s2, 2}, {s3, 1}});
        for (int i = 0; i <= 200; ++i) {
            const double x = 5.0 * i / 200;
            const double want = eval(s2, x) * eval(s2, x) * eval(s3, x);
            CAPTURE(x);
            CHECK(std::fabs(eval(p, x) - want) <= 1e-12 * want + 1e-300);
        }
    }
    SUBCASE("capacity") {
        const ExpSum s = table2_n3();
        CHECK_THROWS_AS(combine_powers({{s, 40}}), std::length_error);
    }
}
