#include <doctest.h>

#include <cmath>
#include <random>

#include "qmm/erranalysis.hpp"
#include "qmm/minimax.hpp"

using namespace qmm;

namespace {

const TargetPoly kId = TargetPoly::identity();

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

void check_pairs(const ExpSum& s, const std::vector<double>& a, const std::vector<double>& b, double tol) {
    REQUIRE(s.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CAPTURE(i);
        CHECK(rel(s[i].a, a[i]) <= tol);
        CHECK(rel(s[i].b, b[i]) <= tol);
    }
}

const std::vector<double> kA2{3.736889599671366e-1, 1.167651897698837e-1};
const std::vector<double> kB2{8.179084584179674e-1, 1.645047046852372e+1};
const std::vector<double> kA4{2.936683276537767e-1, 1.357580421878250e-1, 5.245255757691102e-2, 1.673209873360605e-2};
const std::vector<double> kB4{6.517755981618476e-1, 3.250040490513459e+0, 3.186882707224491e+1, 7.786613983601425e+2};

}  // namespace

TEST_CASE("variants") {
    CHECK(Variant::parse("approx0") == Variant::approx0());
    CHECK(Variant::parse("upper").name() == "upper");
    CHECK_THROWS_AS(Variant::parse("middle"), std::invalid_argument);
    CHECK_THROWS_AS(Variant(Kind::lower_bound, Origin::zero_at_origin), std::invalid_argument);
    CHECK_THROWS_AS(Variant(Kind::upper_bound, Origin::weighted_at_origin), std::invalid_argument);
}

TEST_CASE("extrema counts and equation counts") {
    const int N = 7;
    CHECK(extrema_count(ErrorMeasure::absolute, Kind::approximation, N) == 14);
    CHECK(extrema_count(ErrorMeasure::absolute, Kind::lower_bound, N) == 14);
    CHECK(extrema_count(ErrorMeasure::absolute, Kind::upper_bound, N) == 13);
    CHECK(extrema_count(ErrorMeasure::relative, Kind::approximation, N) == 13);
    CHECK(extrema_count(ErrorMeasure::relative, Kind::lower_bound, N) == 13);
    CHECK(extrema_count(ErrorMeasure::relative, Kind::upper_bound, N) == 12);

    auto eq = [&](ErrorMeasure m, Variant v) {
        return SolveSpec::make(kId, m, v, N, m == ErrorMeasure::relative ? std::optional(4.0) : std::nullopt)
            .equation_count();
    };
    CHECK(eq(ErrorMeasure::absolute, Variant::approxw()) == 4 * N + 1);
    CHECK(eq(ErrorMeasure::absolute, Variant::approx0()) == 4 * N + 1);
    CHECK(eq(ErrorMeasure::absolute, Variant::lower()) == 4 * N + 1);
    CHECK(eq(ErrorMeasure::absolute, Variant::upper()) == 4 * N);
    CHECK(eq(ErrorMeasure::relative, Variant::approx0()) == 4 * N);
    CHECK(eq(ErrorMeasure::relative, Variant::lower()) == 4 * N);
    CHECK(eq(ErrorMeasure::relative, Variant::upper()) == 4 * N - 1);
}

TEST_CASE("SolveSpec validation") {
    CHECK_THROWS_AS(SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), 0), std::invalid_argument);
    CHECK_THROWS_AS(SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), 26), std::invalid_argument);
    CHECK_THROWS_AS(SolveSpec::make(kId, ErrorMeasure::relative, Variant::approx0(), 3), std::invalid_argument);
    CHECK_THROWS_AS(SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approx0(), 3, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(SolveSpec::make(kId, ErrorMeasure::relative, Variant::approx0(), 3, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), 2, std::nullopt, {1, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), 1, std::nullopt, {0.5, 0.5, 0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), 1, std::nullopt, {1, 1.5, 1}),
                    std::invalid_argument);

    const SolveSpec up = SolveSpec::make(kId, ErrorMeasure::absolute, Variant::upper(), 3);
    REQUIRE(up.fixed_min_b);
    CHECK(*up.fixed_min_b == 0.5);
    CHECK(*SolveSpec::make(TargetPoly::power(3), ErrorMeasure::absolute, Variant::upper(), 3).fixed_min_b == 1.5);
    CHECK(SolveSpec::make(kId, ErrorMeasure::relative, Variant::approx0(), 3, 6.0).num_weights() == 7);
}

TEST_CASE("residuals at the published N = 2 set") {
    const SolveSpec spec = SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), 2);
    const ExpSum s(kA2, kB2);
    const auto ex = find_extrema(s, kId, ErrorMeasure::absolute, 0.0, 15.0);
    REQUIRE(ex.size() == 4);
    Params p{kA2, kB2, {}, std::fabs(ex[0].e)};
    for (const auto& z : ex) p.x.push_back(z.x);
    const Eigen::VectorXd u = pack(spec, p);
    CHECK(u.size() == spec.num_unknowns());
    const Eigen::VectorXd r = residuals(spec, u);
    CHECK(r.size() == spec.num_unknowns());
    CHECK(r.lpNorm<Eigen::Infinity>() <= 1e-9);

    SUBCASE("origin row after scaling a_1 by 1.01") {
        Params q = p;
        q.a[0] *= 1.01;
        const Eigen::VectorXd rq = residuals(spec, pack(spec, q));
        const int origin_row = 2 * spec.K();
        CHECK(rq(origin_row) == doctest::Approx(r(origin_row) - 0.01 * kA2[0]).epsilon(1e-12));
        CHECK(rq(origin_row) == doctest::Approx(-0.01 * kA2[0]).epsilon(1e-7));
    }
    SUBCASE("pack and unpack are inverse") {
        const Params back = unpack(spec, u);
        for (int i = 0; i < 2; ++i) {
            CHECK(rel(back.a[i], p.a[i]) <= 1e-14);
            CHECK(rel(back.b[i], p.b[i]) <= 1e-14);
        }
        CHECK(rel(back.e, p.e) <= 1e-14);
    }
    CHECK_THROWS_AS(residuals(spec, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("Jacobian against central differences") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> jitter(0.0, 0.05);
    for (ErrorMeasure m : {ErrorMeasure::absolute, ErrorMeasure::relative})
        for (Variant v : {Variant::approx0(), Variant::approxw(), Variant::lower(), Variant::upper()}) {
            const std::optional<double> xe = m == ErrorMeasure::relative ? std::optional(4.0) : std::nullopt;
            const SolveSpec spec = SolveSpec::make(kId, m, v, 3, xe);
            const MinimaxSolution sol = solve(spec);
            Params p{sol.expsum.a(), sol.expsum.b(), sol.extrema, sol.e_max};
            Eigen::VectorXd u = pack(spec, p);
            for (int i = 0; i < u.size(); ++i) u(i) += jitter(rng);  // a random interior point
            const Eigen::MatrixXd J = jacobian(spec, u);
            const double h = 1e-3;
            double worst = 0.0;
            for (int j = 0; j < u.size(); ++j) {
                // fourth-order stencil; second order leaves either truncation or cancellation above 1e-5
                auto at = [&](double t) {
                    Eigen::VectorXd w = u;
                    w(j) += t;
                    return residuals(spec, w);
                };
                const Eigen::VectorXd fd = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
                for (int i = 0; i < fd.size(); ++i) {
                    // entries far below the row scale carry only cancellation noise
                    const double scale = std::max(std::fabs(J(i, j)), 1e-6 * J.row(i).lpNorm<Eigen::Infinity>());
                    worst = std::max(worst, std::fabs(J(i, j) - fd(i)) / scale);
                }
            }
            CAPTURE(v.name());
            CHECK(worst <= 1e-5);
        }
}

TEST_CASE("solve reproduces the published N = 2 set") {
    const MinimaxSolution sol = solve(SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), 2));
    check_pairs(sol.expsum, kA2, kB2, 1e-8);
    CHECK(sol.diagnostics.residual_norm <= 1e-12);
    CHECK(sol.e_max == doctest::Approx(9.546e-3).epsilon(2e-6 / 9.546e-3));
    CHECK(sol.extrema.size() == 4);
}

TEST_CASE("continuation guess from N = 2, 3 reaches the published N = 4 set") {
    std::vector<MinimaxSolution> prior;
    for (int n : {2, 3}) prior.push_back(solve(SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), n)));
    const SolveSpec spec = SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), 4);
    const Eigen::VectorXd g = initial_guess(spec, prior);
    CHECK(g.size() == spec.num_unknowns());
    const MinimaxSolution sol = solve(spec, g);
    check_pairs(sol.expsum, kA4, kB4, 1e-8);
}

TEST_CASE("N = 1 from an empty prior") {
    const SolveSpec spec = SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approx0(), 1);
    const Eigen::VectorXd g = initial_guess(spec, {});
    CHECK(g.size() == spec.num_unknowns());
    const MinimaxSolution sol = solve(spec, g);
    CHECK(sol.diagnostics.residual_norm <= 1e-12);
    CHECK(certify(sol).passed());
}

TEST_CASE("guess dimensions match for every variant") {
    for (ErrorMeasure m : {ErrorMeasure::absolute, ErrorMeasure::relative})
        for (Variant v : {Variant::approx0(), Variant::approxw(), Variant::lower(), Variant::upper()})
            for (int N : {1, 2, 5}) {
                const std::optional<double> xe = m == ErrorMeasure::relative ? std::optional(3.0) : std::nullopt;
                const SolveSpec spec = SolveSpec::make(kId, m, v, N, xe);
                CAPTURE(v.name());
                CAPTURE(N);
                const Eigen::VectorXd g = initial_guess(spec, {});
                CHECK(g.size() == spec.num_unknowns());
                CHECK(residuals(spec, g).size() == g.size());
            }
}

TEST_CASE("guess with a wrong dimension is rejected") {
    const SolveSpec spec = SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), 2);
    CHECK_THROWS_AS(solve(spec, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST_CASE("sweep") {
    std::vector<SolveSpec> specs;
    for (int n = 1; n <= 8; ++n) specs.push_back(SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), n));
    const auto a = sweep(specs);
    REQUIRE(a.size() == 8);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].solution);
        if (i) CHECK(a[i].solution->e_max < a[i - 1].solution->e_max);
    }
    SUBCASE("bit-identical reruns") {
        const auto b = sweep(specs);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t n = 0; n < a[i].solution->expsum.size(); ++n) {
                CHECK(a[i].solution->expsum[n].a == b[i].solution->expsum[n].a);
                CHECK(a[i].solution->expsum[n].b == b[i].solution->expsum[n].b);
            }
    }
}

TEST_CASE("relative e_max grows with x_end") {
    double prev = 0.0;
    for (int xe = 1; xe <= 10; ++xe) {
        const MinimaxSolution s =
            solve(SolveSpec::make(kId, ErrorMeasure::relative, Variant::approx0(), 5, static_cast<double>(xe)));
        CAPTURE(xe);
        CHECK(s.e_max >= prev);
        prev = s.e_max;
    }
}

TEST_CASE("eliminating e_max gives the same coefficients") {
    SolveOptions elim;
    elim.eliminate_emax = true;
    for (int N : {2, 3, 4}) {
        const SolveSpec spec = SolveSpec::make(kId, ErrorMeasure::absolute, Variant::approxw(), N);
        const MinimaxSolution a = solve(spec), b = solve(spec, std::nullopt, elim);
        for (int n = 0; n < N; ++n) {
            CHECK(rel(b.expsum[n].a, a.expsum[n].a) <= 1e-8);
            CHECK(rel(b.expsum[n].b, a.expsum[n].b) <= 1e-8);
        }
        CHECK(rel(b.e_max, a.e_max) <= 1e-8);
    }
}

TEST_CASE("weighted extrema") {
    const SolveSpec spec =
        SolveSpec::make(kId, ErrorMeasure::relative, Variant::approx0(), 2, 4.0, {1.0, 0.5, 0.5, 0.5, 1.0});
    const MinimaxSolution s = solve(spec);
    CHECK(s.diagnostics.residual_norm <= 1e-12);
    CHECK(certify(s).passed());
}

TEST_CASE("power and polynomial targets") {
    const MinimaxSolution s3 = solve(SolveSpec::make(TargetPoly::power(3), ErrorMeasure::absolute, Variant::upper(), 3));
    CHECK(s3.expsum.min_b() == 1.5);
    CHECK(certify(s3).passed());
    const MinimaxSolution qam = solve(SolveSpec::make(TargetPoly::qam4(), ErrorMeasure::relative, Variant::lower(), 4, 5.0));
    CHECK(certify(qam).passed());
}
