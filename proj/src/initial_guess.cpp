#include <algorithm>
#include <cmath>
#include <numeric>
#include <unsupported/Eigen/NonLinearOptimization>

#include "minimax_detail.hpp"
#include "qmm/erranalysis.hpp"
#include "qmm/special_fn.hpp"
#include "spline.hpp"

namespace qmm {
namespace detail {

namespace {

struct Prior {
    int N;
    Params p;
};

std::vector<double> logv(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = std::log(v[i]);
    return r;
}

std::vector<double> expv(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = std::exp(v[i]);
    return r;
}

bool increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return std::all_of(v.begin(), v.end(), [](double z) { return std::isfinite(z); });
}

double ext_anchor(const std::vector<double>& seq) {
    const std::size_t n = seq.size();
    if (n >= 3) return 3 * seq[n - 1] - 3 * seq[n - 2] + seq[n - 3];
    if (n == 2) return 2 * seq[1] - seq[0];
    return seq[0];
}

// Each vector is split into its end values and a normalized shape on [0, 1];
// ends are extrapolated quadratically in N, the shape pointwise after spline
// resampling to the new length.
std::vector<double> shape_extrapolate(const std::vector<std::vector<double>>& vs, int len) {
    std::vector<double> bot, top;
    for (const auto& v : vs) {
        bot.push_back(v.front());
        top.push_back(v.back());
    }
    const double b = ext_anchor(bot), t = ext_anchor(top);
    std::vector<std::vector<double>> fs;
    for (const auto& v : vs) {
        const std::size_t m = v.size();
        std::vector<double> s(m), f(m);
        for (std::size_t i = 0; i < m; ++i) {
            s[i] = m > 1 ? static_cast<double>(i) / (m - 1) : 0.0;
            f[i] = (v[i] - v.front()) / (v.back() - v.front());
        }
        CubicSpline sp(s, f);
        std::vector<double> g(len);
        for (int i = 0; i < len; ++i) g[i] = sp(len > 1 ? static_cast<double>(i) / (len - 1) : 0.0);
        fs.push_back(std::move(g));
    }
    std::vector<double> out(len);
    for (int i = 0; i < len; ++i) {
        std::vector<double> col;
        for (const auto& g : fs) col.push_back(g[i]);
        out[i] = b + ext_anchor(col) * (t - b);
    }
    return out;
}

std::vector<double> top_diffs(const std::vector<double>& v) {
    std::vector<double> d;
    for (std::size_t i = v.size(); i-- > 1;) d.push_back(v[i] - v[i - 1]);
    return d;
}

double bottom_ratio(double d0, double d1) {
    const double r = d0 / d1;
    return std::isfinite(r) ? std::clamp(r, 0.5, 1.0) : 1.0;
}

// Extrapolates log a and log b from the two latest solutions, keeping the
// spacing pattern anchored at the top (largest b) end.
void crude_ab(const std::vector<Prior>& P, int N, std::optional<double> fixb, std::vector<double>& a,
              std::vector<double>& b) {
    if (P.empty()) {
        a.assign(N, 0.0);
        b.assign(N, 0.0);
        for (int n = 0; n < N; ++n) {
            a[n] = 0.45 * std::pow(0.3, n);
            b[n] = std::pow(30.0, n);
        }
        if (fixb) {
            const double s = *fixb / b[0];
            for (double& v : b) v *= s;
        }
        return;
    }
    if (P.size() == 1) {
        a = P[0].p.a;
        b = P[0].p.b;
        while (static_cast<int>(a.size()) < N) {
            a.push_back(a.back() * 0.3);
            b.push_back(b.back() * 20.0);
        }
        return;
    }
    const Params& p0 = P[P.size() - 1].p;
    const Params& p1 = P[P.size() - 2].p;
    const auto lb0 = logv(p0.b), lb1 = logv(p1.b), la0 = logv(p0.a), la1 = logv(p1.a);
    const auto Db0 = top_diffs(lb0), Db1 = top_diffs(lb1), Da0 = top_diffs(la0), Da1 = top_diffs(la1);
    std::vector<double> Db(N - 1), Da(N - 1);
    for (int j = 0; j < N - 1; ++j) {
        if (j < static_cast<int>(Db1.size())) {
            Db[j] = 2 * Db0[j] - Db1[j];
            Da[j] = 2 * Da0[j] - Da1[j];
        } else if (j < static_cast<int>(Db0.size())) {
            Db[j] = Db0[j];
            Da[j] = Da0[j];
        } else if (!Db0.empty()) {
            const double bd0 = Db0.back(), bd1 = Db1.empty() ? bd0 * 1.3 : Db1.back();
            const double ad0 = Da0.back(), ad1 = Da1.empty() ? ad0 * 1.3 : Da1.back();
            Db[j] = bd0 * bottom_ratio(bd0, bd1);
            Da[j] = ad0 * bottom_ratio(ad0, ad1);
        } else {
            Db[j] = std::log(20.0);
            Da[j] = std::log(0.3);
        }
    }
    std::vector<double> lb(N), la(N);
    lb[0] = fixb ? std::log(*fixb) : lb0[0] + 0.8 * (lb0[0] - lb1[0]);
    la[0] = la0[0] + 0.8 * (la0[0] - la1[0]);
    for (int n = 1; n < N; ++n) {
        lb[n] = lb[n - 1] + Db[N - 1 - n];
        la[n] = la[n - 1] + Da[N - 1 - n];
    }
    a = expv(la);
    b = expv(lb);
}

double crude_e(const std::vector<Prior>& P) {
    if (P.size() >= 2) return P.back().p.e * P.back().p.e / P[P.size() - 2].p.e;
    if (P.size() == 1) return 0.3 * P.back().p.e;
    return 0.05;
}

double fit_hi(const SolveSpec& spec) { return spec.measure == ErrorMeasure::relative ? *spec.x_end : 15.0; }

std::optional<std::vector<Extremum>> scan(const SolveSpec& spec, const std::vector<double>& a,
                                          const std::vector<double>& b) {
    try {
        ExpSum s(a, b);
        auto ex = find_extrema(s, spec.target, spec.measure, 0.0, fit_hi(spec));
        if (spec.measure == ErrorMeasure::relative)
            std::erase_if(ex, [&](const Extremum& z) { return !(z.x < *spec.x_end); });
        return ex;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void normalize(const SolveSpec& spec, Params& p) {
    const double s = std::accumulate(p.a.begin(), p.a.end(), 0.0);
    const double want = origin_sum(spec, p.e);
    if (s > 0 && want > 0)
        for (double& v : p.a) v *= want / s;
}

// Least-squares fit of (log a, log b) to the target on a mixed grid.
struct L2Functor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    int N;
    bool rel;
    std::vector<double> x, T;
    int inputs() const { return 2 * N; }
    int values() const { return static_cast<int>(x.size()); }

    int operator()(const Eigen::VectorXd& v, Eigen::VectorXd& f) const {
        for (int i = 0; i < values(); ++i) {
            double S = 0.0;
            for (int n = 0; n < N; ++n) S += std::exp(v(n) - std::exp(v(N + n)) * x[i] * x[i]);
            f(i) = rel ? S / T[i] - 1.0 : S - T[i];
        }
        return 0;
    }
    int df(const Eigen::VectorXd& v, Eigen::MatrixXd& J) const {
        for (int i = 0; i < values(); ++i) {
            const double sc = rel ? 1.0 / T[i] : 1.0;
            for (int n = 0; n < N; ++n) {
                const double b = std::exp(v(N + n));
                const double t = std::exp(v(n) - b * x[i] * x[i]);
                J(i, n) = t * sc;
                J(i, N + n) = -t * b * x[i] * x[i] * sc;
            }
        }
        return 0;
    }
};

bool l2fit(const SolveSpec& spec, std::vector<double>& a, std::vector<double>& b) {
    const int N = static_cast<int>(a.size());
    const double hi = fit_hi(spec);
    const double bmax = *std::max_element(b.begin(), b.end());
    const double lo = 0.05 / std::sqrt(bmax);
    L2Functor fn;
    fn.N = N;
    fn.rel = spec.measure == ErrorMeasure::relative;
    for (int i = 0; i < 600; ++i) fn.x.push_back(lo * std::pow(hi / lo, i / 599.0));
    for (int i = 0; i < 400; ++i) fn.x.push_back(hi * i / 399.0);
    std::sort(fn.x.begin(), fn.x.end());
    fn.x.erase(std::unique(fn.x.begin(), fn.x.end()), fn.x.end());
    for (double x : fn.x) fn.T.push_back(target_eval(spec.target, x));
    Eigen::VectorXd v(2 * N);
    for (int n = 0; n < N; ++n) {
        v(n) = std::log(a[n]);
        v(N + n) = std::log(b[n]);
    }
    Eigen::LevenbergMarquardt<L2Functor> lm(fn);
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-12;
    lm.parameters.maxfev = 2000;
    lm.minimize(v);
    if (!v.allFinite()) return false;
    std::vector<std::pair<double, double>> ba(N);
    for (int n = 0; n < N; ++n) ba[n] = {std::exp(v(N + n)), std::exp(v(n))};
    std::sort(ba.begin(), ba.end());
    for (int n = 0; n < N; ++n) {
        b[n] = ba[n].first;
        a[n] = ba[n].second;
    }
    return increasing(b);
}

std::vector<Prior> consecutive(const SolveSpec& spec, const std::vector<MinimaxSolution>& prior) {
    std::vector<Prior> all;
    for (const auto& s : prior)
        if (s.spec.N < spec.N)
            all.push_back({s.spec.N, Params{s.expsum.a(), s.expsum.b(), s.extrema, s.e_max}});
    std::sort(all.begin(), all.end(), [](const Prior& l, const Prior& r) { return l.N < r.N; });
    std::vector<Prior> run;
    int want = spec.N - 1;
    for (auto it = all.rbegin(); it != all.rend(); ++it) {
        if (it->N != want) break;
        run.insert(run.begin(), *it);
        --want;
    }
    return run;
}

System upper_path(const SolveSpec& spec, double beta0, double t) {
    System s = make_system(spec);
    const double fixb = *spec.fixed_min_b;
    // t in [0, 1/2]: pin b_1 and move it to its bound; t in [1/2, 1]: lower the
    // even extrema from -e_max to the tangency level 0.
    const double f = std::min(1.0, 2.0 * t);
    const double lam = t <= 0.5 ? 1.0 : 1.0 - 2.0 * (t - 0.5);
    s.fixed_b1 = beta0 + (fixb - beta0) * f;
    for (int k = 1; k < s.K; k += 2) s.level[k] = -lam * spec.weights[k + 1];
    if (s.relative()) s.end_level = (1.0 - 2.0 * lam) * spec.weights[s.K + 1];
    return s;
}

System lower_path(const SolveSpec& spec, double t) {
    System s = make_system(spec);
    for (int k = 0; k < s.K; k += 2) s.level[k] = (1.0 - t) * spec.weights[k + 1];
    return s;
}

}  // namespace

std::vector<CandidateGen> candidates(const SolveSpec& spec, const std::vector<MinimaxSolution>& prior,
                                     const Companion& companion) {
    const int N = spec.N, K = spec.K();
    const Kind kind = spec.variant.kind();
    const std::vector<Prior> P = consecutive(spec, prior);
    std::vector<CandidateGen> gens;

    auto shape = [spec, P, N, K](std::size_t depth, const char* name) -> std::optional<Candidate> {
        std::vector<Prior> Q;
        for (const Prior& pr : P)
            if (pr.p.b.size() >= 2 && pr.p.x.size() >= 2) Q.push_back(pr);
        if (Q.size() < depth || Q.back().N != N - 1 || K < 1) return std::nullopt;
        Q.erase(Q.begin(), Q.end() - static_cast<std::ptrdiff_t>(depth));
        std::vector<std::vector<double>> lb, la, lx;
        std::vector<double> le;
        for (const Prior& pr : Q) {
            lb.push_back(logv(pr.p.b));
            la.push_back(logv(pr.p.a));
            lx.push_back(logv(pr.p.x));
            le.push_back(std::log(pr.p.e));
        }
        auto b = shape_extrapolate(lb, N);
        if (spec.fixed_min_b) b[0] = std::log(*spec.fixed_min_b);
        Params p{expv(shape_extrapolate(la, N)), expv(b), expv(shape_extrapolate(lx, K)), std::exp(ext_anchor(le))};
        if (!increasing(p.b) || !increasing(p.x)) return std::nullopt;
        normalize(spec, p);
        return Candidate{name, p};
    };
    gens.push_back([shape] { return shape(3, "shape"); });
    gens.push_back([shape] { return shape(2, "shape2"); });

    auto crude_scan = [spec, P, N, K]() -> std::optional<Candidate> {
        Params p;
        crude_ab(P, N, spec.fixed_min_b, p.a, p.b);
        p.e = crude_e(P);
        if (!increasing(p.b)) return std::nullopt;
        normalize(spec, p);
        auto ex = scan(spec, p.a, p.b);
        if (!ex || static_cast<int>(ex->size()) != K) return std::nullopt;
        for (const auto& z : *ex) p.x.push_back(z.x);
        return Candidate{"scan", p};
    };

    auto l2 = [spec, P, N, K]() -> std::optional<Candidate> {
        Params p;
        crude_ab(P, N, spec.fixed_min_b, p.a, p.b);
        if (!increasing(p.b) || !l2fit(spec, p.a, p.b)) return std::nullopt;
        auto ex = scan(spec, p.a, p.b);
        if (!ex || static_cast<int>(ex->size()) < K || K == 0) return std::nullopt;
        ex->erase(ex->begin(), ex->end() - K);
        double e = 0.0;
        for (const auto& z : *ex) {
            p.x.push_back(z.x);
            e += std::fabs(z.e);
        }
        p.e = e / K;
        normalize(spec, p);
        return Candidate{"l2", p};
    };

    if (kind == Kind::upper_bound) {
        gens.push_back([spec, companion, N, K]() -> std::optional<Candidate> {
            if (!companion) return std::nullopt;
            auto A = companion(Variant::approx0(), N);
            if (!A) return std::nullopt;
            Params p{A->expsum.a(), A->expsum.b(), A->extrema, A->e_max};
            p.b[0] = *spec.fixed_min_b;
            if (!increasing(p.b)) return std::nullopt;
            p.x.resize(K);
            normalize(spec, p);
            if (spec.measure == ErrorMeasure::relative && K == 0) {
                try {
                    p.e = std::fabs(error(ExpSum(p.a, p.b), spec.target, spec.measure, *spec.x_end));
                } catch (const std::exception&) {
                    return std::nullopt;
                }
            }
            return Candidate{"direct", p};
        });
        gens.push_back([spec, companion, N, K]() -> std::optional<Candidate> {
            if (!companion) return std::nullopt;
            auto A = companion(Variant::approx0(), N);
            if (!A) return std::nullopt;
            const double beta0 = A->expsum.min_b();
            Params p{A->expsum.a(), A->expsum.b(), A->extrema, A->e_max};
            p.x.resize(K);
            auto path = [&](double t) { return upper_path(spec, beta0, t); };
            auto u = homotopy(path, {0.15, 0.3, 0.4, 0.475, 0.5, 0.7, 0.85, 0.95, 1.0}, pack(path(0.0), p));
            if (!u) return std::nullopt;
            return Candidate{"homotopy", unpack(path(1.0), *u)};
        });
        gens.push_back(crude_scan);
    } else {
        gens.push_back(crude_scan);
        gens.push_back(l2);
        if (kind == Kind::lower_bound) {
            gens.push_back([spec, companion, N]() -> std::optional<Candidate> {
                if (!companion) return std::nullopt;
                auto A = companion(Variant::approxw(), N);
                if (!A) return std::nullopt;
                Params p{A->expsum.a(), A->expsum.b(), A->extrema, A->e_max};
                auto path = [&](double t) { return lower_path(spec, t); };
                auto u = homotopy(path, {0.4, 0.7, 0.9, 1.0}, pack(path(0.0), p));
                if (!u) return std::nullopt;
                return Candidate{"homotopy", unpack(path(1.0), *u)};
            });
        }
    }
    return gens;
}

}  // namespace detail

Eigen::VectorXd initial_guess(const SolveSpec& spec, const std::vector<MinimaxSolution>& prior) {
    spec.validate();
    const detail::System sys = detail::make_system(spec);
    // The first candidate Newton carries to a plausible root wins; otherwise the
    // first finite one.
    std::optional<Eigen::VectorXd> first;
    for (const auto& g : detail::candidates(spec, prior, nullptr)) {
        auto c = g();
        if (!c) continue;
        Eigen::VectorXd u = detail::pack(sys, c->p);
        if (!u.allFinite()) continue;
        if (!first) first = u;
        const detail::NewtonResult nr = detail::newton(sys, u, SolveOptions{}.max_iterations, 1e-13);
        if (nr.norm <= SolveOptions{}.tolerance && detail::plausible(spec, detail::unpack(sys, nr.u))) return u;
    }
    if (first) return *first;
    // Fallback: crude (a, b) with the scanned extrema padded or trimmed to K.
    const int N = spec.N, K = spec.K();
    Params p;
    std::vector<detail::Prior> P = detail::consecutive(spec, prior);
    detail::crude_ab(P, N, spec.fixed_min_b, p.a, p.b);
    p.e = detail::crude_e(P);
    detail::normalize(spec, p);
    auto ex = detail::scan(spec, p.a, p.b);
    if (ex)
        for (const auto& z : *ex) p.x.push_back(z.x);
    const double hi = spec.measure == ErrorMeasure::relative ? *spec.x_end : 6.0;
    if (static_cast<int>(p.x.size()) > K) p.x.erase(p.x.begin(), p.x.end() - K);
    while (static_cast<int>(p.x.size()) < K) {
        const double last = p.x.empty() ? 0.0 : p.x.back();
        p.x.push_back(last + (hi - last) / (K - p.x.size() + 1));
    }
    return detail::pack(sys, p);
}

}  // namespace qmm
