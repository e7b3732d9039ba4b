#include <doctest.h>

#include <cmath>

#include "qmm/baselines.hpp"
#include "qmm/coeff_file.hpp"
#include "qmm/erranalysis.hpp"

using namespace qmm;

namespace {

const TargetPoly kId = TargetPoly::identity();

std::string data(const char* name) { return std::string(QMM_DATA_DIR) + "/" + name; }

const CertCheck& check(const CertReport& r, const std::string& name) {
    for (const CertCheck& c : r.checks)
        if (c.name == name) return c;
    throw std::runtime_error("no check " + name);
}

}  // namespace

TEST_CASE("scan grid") {
    const auto g = scan_grid(0.0, 15.0, 1e9);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 15.0);
    CHECK(g.size() >= 10000);
    for (std::size_t i = 1; i < g.size(); ++i) REQUIRE(g[i] > g[i - 1]);
    CHECK(g[1] < 1e-5);  // the band reaches down to ~1e-2/sqrt(max b)
}

TEST_CASE("extrema of published sets") {
    const CoefficientFile n2 = load(data("table2_n2.json"));
    const auto ex = find_extrema(n2.solution.expsum, kId, ErrorMeasure::absolute, 0.0, 15.0);
    REQUIRE(ex.size() == 4);
    for (std::size_t k = 0; k < ex.size(); ++k) CHECK((ex[k].e > 0) == (k % 2 == 0));

    const CoefficientFile n20 = load(data("table2_n20_rel.json"));
    CHECK(find_extrema(n20.solution.expsum, kId, ErrorMeasure::relative, 0.0, 6.0).size() == 39);
}

TEST_CASE("single term (1/2, 1/2)") {
    const ExpSum s({0.5}, {0.5});
    CHECK(error(s, kId, ErrorMeasure::absolute, 0.0) == 0.0);
    const auto ex = find_extrema(s, kId, ErrorMeasure::absolute, 0.0, 15.0);
    REQUIRE(ex.size() == 1);
    CHECK(ex[0].e > 0.0);
    for (double x : {0.1, 0.5, 1.0, 2.0, 4.0}) CHECK(error(s, kId, ErrorMeasure::absolute, x) > 0.0);
    CHECK(error(s, kId, ErrorMeasure::absolute, 4.0) < error(s, kId, ErrorMeasure::absolute, 2.0));
}

TEST_CASE("measured maxima") {
    CHECK(max_error(chiani_n2(), kId, ErrorMeasure::absolute, 0.0, 15.0) == doctest::Approx(1.667e-1).epsilon(1e-4 / 1.667e-1));
    const CoefficientFile n20 = load(data("table2_n20_rel.json"));
    CHECK(max_error(n20.solution.expsum, kId, ErrorMeasure::absolute, 0.0, 15.0) <= 1.416e-6);
    CHECK(max_error(n20.solution.expsum, kId, ErrorMeasure::relative, 0.0, 6.0) <= 2.831e-6);
    const MaxError at0 = max_error_at(ExpSum({0.5}, {0.5}), kId, ErrorMeasure::absolute, 0.0, 0.0);
    CHECK(at0.value == 0.0);
    CHECK(at0.x == 0.0);
}

TEST_CASE("error profile") {
    const CoefficientFile n2 = load(data("table2_n2.json"));
    const ErrorProfile p = error_profile(n2.solution.expsum, kId, ErrorMeasure::absolute, 0.0, 10.0, 101);
    REQUIRE(p.grid.size() == 101);
    for (const ProfileRow& r : p.grid) {
        CHECK(r.d == r.approx - r.target);
        CHECK(std::fabs(r.r - r.d / r.target) <= 1e-15 * std::fabs(r.r));
    }
    CHECK(p.measured_d_max == doctest::Approx(9.546e-3).epsilon(2e-6 / 9.546e-3));
    CHECK(p.extrema.size() == 4);

    const ErrorProfile one = error_profile(ExpSum({0.5}, {0.5}), kId, ErrorMeasure::absolute, 0.0, 0.0, 1);
    REQUIRE(one.grid.size() == 1);
    CHECK(one.grid[0].x == 0.0);
    CHECK(one.grid[0].d == 0.0);

    // relative scanning stops where the target underflows
    const ErrorProfile far = error_profile(n2.solution.expsum, kId, ErrorMeasure::absolute, 0.0, 45.0, 10);
    CHECK(far.r_cap < 38.5);
    CHECK(far.r_cap == doctest::Approx(target_floor_x(kId)));
}

TEST_CASE("certify") {
    CoefficientFile n3 = load(data("table2_n3.json"));
    const CertReport ok = certify(n3.solution);
    CHECK(ok.passed());
    CHECK(ok.to_string().find("certified") != std::string::npos);

    SUBCASE("a_1 perturbed by 1e-3 breaks the ripple") {
        MinimaxSolution bad = n3.solution;
        auto a = bad.expsum.a();
        a[0] *= 1.0 + 1e-3;
        bad.expsum = ExpSum(a, bad.expsum.b());
        const CertReport r = certify(bad);
        CHECK_FALSE(r.passed());
        CHECK_FALSE(check(r, "equal_ripple").passed);
    }
    SUBCASE("reference set is not an upper bound near the origin") {
        // 1/12 + 1/4 = 1/3 < Q(0)
        const SolveSpec spec = SolveSpec::make(kId, ErrorMeasure::absolute, Variant::upper(), 2);
        const CertReport r = certify(describe(chiani_n2(), spec));
        CHECK_FALSE(r.passed());
        CHECK_FALSE(check(r, "one_sided").passed);
        CHECK_FALSE(check(r, "equal_ripple").passed);
    }
    SUBCASE("published relative N = 20 block") {
        CHECK(certify(load(data("table2_n20_rel.json")).solution).passed());
    }
}
