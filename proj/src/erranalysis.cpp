#include "qmm/erranalysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "minimax_detail.hpp"

namespace qmm {

double target_floor_x(const TargetPoly& t) {
    double lo = 0.0, hi = 40.0;
    if (std::fabs(target_eval(t, hi)) >= kTargetFloor) return hi;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::fabs(target_eval(t, mid)) >= kTargetFloor)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::vector<double> scan_grid(double lo, double hi, double max_b, int points) {
    std::vector<double> g;
    if (!(hi > lo)) return {lo};
    const int half = points / 2;
    const double lin_hi = std::min(1.0, hi);
    for (int i = 0; i < half; ++i) g.push_back(lin_hi * i / (half - 1));
    if (hi > 1.0) {
        const double r = std::log(hi);
        for (int i = 0; i < half; ++i) g.push_back(std::exp(r * i / (half - 1)));
    }
    const double xs = 1e-2 / std::sqrt(std::max(max_b, 1.0));
    if (xs < 1e-2) {
        const int n = points / 5;
        const double l0 = std::log(xs), l1 = std::log(lin_hi);
        for (int i = 0; i < n; ++i) g.push_back(std::exp(l0 + (l1 - l0) * i / (n - 1)));
    }
    g.push_back(lo);
    g.push_back(hi);
    std::erase_if(g, [&](double x) { return x < lo || x > hi; });
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

namespace {

double cap_hi(const TargetPoly& t, ErrorMeasure m, double hi) {
    return m == ErrorMeasure::relative ? std::min(hi, target_floor_x(t)) : hi;
}

double refine(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double lo, double hi, double flo) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double fm = error_all(s, t, m, mid).de;
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Extremum> find_extrema(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double lo, double hi) {
    if (lo < 0.0) throw std::invalid_argument("find_extrema: negative range");
    hi = cap_hi(t, m, hi);
    std::vector<Extremum> out;
    if (!(hi > lo)) return out;
    const std::vector<double> g = scan_grid(lo, hi, s.max_b());
    std::vector<double> d(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) d[i] = error_all(s, t, m, g[i]).de;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        double x;
        if (d[i] * d[i + 1] < 0.0) {
            x = refine(s, t, m, g[i], g[i + 1], d[i]);
        } else if (d[i + 1] == 0.0 && i + 2 < g.size() && d[i] * d[i + 2] < 0.0) {
            x = g[i + 1];
        } else {
            continue;
        }
        out.push_back({x, error(s, t, m, x)});
    }
    return out;
}

MaxError max_error_at(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double lo, double hi) {
    hi = cap_hi(t, m, hi);
    MaxError best{std::fabs(error(s, t, m, lo)), lo};
    auto consider = [&](double x, double e) {
        if (std::fabs(e) > best.value) best = {std::fabs(e), x};
    };
    if (hi > lo) {
        for (double x : scan_grid(lo, hi, s.max_b())) consider(x, error(s, t, m, x));
        for (const Extremum& z : find_extrema(s, t, m, lo, hi)) consider(z.x, z.e);
        consider(hi, error(s, t, m, hi));
    }
    return best;
}

double max_error(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double lo, double hi) {
    return max_error_at(s, t, m, lo, hi).value;
}

ErrorProfile error_profile(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double lo, double hi, int points) {
    ErrorProfile p;
    p.r_cap = std::min(hi, target_floor_x(t));
    const int n = std::max(points, 1);
    for (int i = 0; i < n; ++i) {
        const double x = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        const double T = target_eval(t, x), S = eval(s, x);
        const double d = S - T;
        const double r = std::fabs(T) >= kTargetFloor ? d / T : std::numeric_limits<double>::quiet_NaN();
        p.grid.push_back({x, T, S, d, r});
    }
    p.measured_d_max = max_error(s, t, ErrorMeasure::absolute, lo, hi);
    if (p.r_cap >= lo) p.measured_r_max = max_error(s, t, ErrorMeasure::relative, lo, p.r_cap);
    p.extrema = find_extrema(s, t, m, lo, m == ErrorMeasure::relative ? p.r_cap : hi);
    return p;
}

double scan_hi(const SolveSpec& spec, const std::vector<double>& extrema) {
    if (spec.measure == ErrorMeasure::relative) return *spec.x_end;
    return std::max(15.0, extrema.empty() ? 0.0 : 2.0 * extrema.back());
}

bool CertReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CertCheck& c) { return c.passed; });
}

std::string CertReport::to_string() const {
    std::ostringstream os;
    for (const CertCheck& c : checks) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e", c.margin);
        os << (c.passed ? "PASS " : "FAIL ") << c.name << "  margin=" << buf;
        if (!c.detail.empty()) os << "  " << c.detail;
        os << '\n';
    }
    os << (passed() ? "certified" : "not certified") << '\n';
    return os.str();
}

namespace {

std::vector<Extremum> solution_extrema(const MinimaxSolution& sol, double hi) {
    const SolveSpec& spec = sol.spec;
    auto ex = find_extrema(sol.expsum, spec.target, spec.measure, 0.0, hi);
    if (spec.measure == ErrorMeasure::relative)
        std::erase_if(ex, [&](const Extremum& z) { return !(z.x < *spec.x_end); });
    return ex;
}

double active_weight_max(const SolveSpec& spec) {
    double w = spec.variant.origin() == Origin::weighted_at_origin ? spec.weights[0] : 0.0;
    for (double l : detail::value_levels(spec)) w = std::max(w, std::fabs(l));
    if (spec.measure == ErrorMeasure::relative) w = std::max(w, spec.weights[spec.K() + 1]);
    return w > 0.0 ? w : 1.0;
}

}  // namespace

CertReport certify(const MinimaxSolution& sol) {
    CertReport rep;
    const SolveSpec& spec = sol.spec;
    const ExpSum& s = sol.expsum;
    const TargetPoly& t = spec.target;
    const ErrorMeasure m = spec.measure;
    const double e = sol.e_max;
    const int K = spec.K();
    const double hi = scan_hi(spec, sol.extrema);
    const bool rel = m == ErrorMeasure::relative;
    const auto ex = solution_extrema(sol, hi);

    {
        const int n = static_cast<int>(ex.size());
        rep.checks.push_back({"extrema_count", n == K, static_cast<double>(std::abs(n - K)),
                              "found " + std::to_string(n) + ", expected " + std::to_string(K)});
    }

    const auto lv = detail::value_levels(spec);
    const bool weighted_origin = spec.variant.origin() == Origin::weighted_at_origin;
    const double e0 = error(s, t, m, 0.0);
    const double eend = rel ? error(s, t, m, *spec.x_end) : 0.0;
    if (static_cast<int>(ex.size()) == K) {
        double dev = 0.0;
        int bad_sign = 0;
        for (int k = 0; k < K; ++k) {
            if (lv[k] == 0.0) {
                dev = std::max(dev, std::fabs(ex[k].e) / e);
            } else {
                dev = std::max(dev, std::fabs(std::fabs(ex[k].e) / (std::fabs(lv[k]) * e) - 1.0));
                if ((ex[k].e > 0) != (lv[k] > 0)) ++bad_sign;
            }
        }
        if (weighted_origin) {
            dev = std::max(dev, std::fabs(std::fabs(e0) / (spec.weights[0] * e) - 1.0));
            if (!(e0 < 0)) ++bad_sign;
        } else {
            dev = std::max(dev, std::fabs(e0) / e);
        }
        if (rel) {
            const double we = spec.weights[K + 1];
            dev = std::max(dev, std::fabs(std::fabs(eend) / (we * e) - 1.0));
            const bool want_pos = spec.variant.kind() == Kind::upper_bound;
            if ((eend > 0) != want_pos) ++bad_sign;
        }
        rep.checks.push_back({"equal_ripple", dev <= 1e-6, dev, "max relative deviation from w_k e_max"});
        rep.checks.push_back({"sign_pattern", bad_sign == 0, static_cast<double>(bad_sign),
                              std::to_string(bad_sign) + " sign mismatches"});
    } else {
        rep.checks.push_back({"equal_ripple", false, std::numeric_limits<double>::infinity(), "extrema count differs"});
        rep.checks.push_back({"sign_pattern", false, std::numeric_limits<double>::infinity(), "extrema count differs"});
    }

    const Kind kind = spec.variant.kind();
    if (kind == Kind::approximation) {
        rep.checks.push_back({"one_sided", true, 0.0, "not a bound"});
    } else {
        const double bhi = rel ? *spec.x_end : 15.0;
        std::vector<double> xs;
        for (int i = 0; i < 4000; ++i) xs.push_back(bhi * i / 3999.0);
        for (const auto& z : ex) xs.push_back(z.x);
        for (double x : scan_grid(0.0, bhi, s.max_b())) xs.push_back(x);
        double worst = 0.0;
        for (double x : xs) {
            const double v = error(s, t, m, x);
            worst = std::max(worst, kind == Kind::lower_bound ? v : -v);
        }
        const double tol = 1e-8 * e;
        std::string detail = kind == Kind::lower_bound ? "max e over grid" : "max -e over grid";
        if (kind == Kind::upper_bound) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "; min b = %.17g, tail power %d", s.min_b(), t.tail_power());
            detail += buf;
        }
        rep.checks.push_back({"one_sided", worst <= tol, worst, detail});
    }

    {
        const double wmax = active_weight_max(spec);
        const double measured = max_error(s, t, m, 0.0, hi);
        const double dev = std::fabs(measured - wmax * e) / (wmax * e);
        char buf[64];
        std::snprintf(buf, sizeof buf, "measured %.10e", measured);
        rep.checks.push_back({"max_error", dev <= 1e-6, dev, buf});
    }
    if (!rel) {
        const double from = sol.extrema.empty() ? 0.0 : sol.extrema.back();
        const double tail = max_error(s, t, m, from, 50.0);
        rep.checks.push_back({"tail", tail <= e * (1.0 + 1e-6), tail / e, "max |e| on [x_K, 50] over e_max"});
    }
    return rep;
}

MinimaxSolution describe(const ExpSum& s, const SolveSpec& spec) {
    MinimaxSolution sol{s, 0.0, {}, spec, {0, std::numeric_limits<double>::quiet_NaN(), "scan"}};
    const double hi0 = scan_hi(spec, {});
    auto ex = find_extrema(s, spec.target, spec.measure, 0.0, hi0);
    if (spec.measure == ErrorMeasure::relative)
        std::erase_if(ex, [&](const Extremum& z) { return !(z.x < *spec.x_end); });
    for (const auto& z : ex) sol.extrema.push_back(z.x);
    sol.e_max = max_error(s, spec.target, spec.measure, 0.0, scan_hi(spec, sol.extrema)) / active_weight_max(spec);
    if (static_cast<int>(sol.extrema.size()) == spec.K() && static_cast<int>(s.size()) == spec.N) {
        Params p{s.a(), s.b(), sol.extrema, sol.e_max};
        if (!spec.fixed_min_b || p.b[0] == *spec.fixed_min_b) {
            Eigen::VectorXd r = residuals(spec, pack(spec, p));
            if (r.allFinite()) sol.diagnostics.residual_norm = r.lpNorm<Eigen::Infinity>();
        }
    }
    return sol;
}

}  // namespace qmm
