#include "qmm/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "minimax_detail.hpp"
#include "qmm/erranalysis.hpp"
#include "qmm/special_fn.hpp"

namespace qmm {

Variant::Variant(Kind kind, Origin origin) : kind_(kind), origin_(origin) {
    if (kind == Kind::lower_bound && origin != Origin::weighted_at_origin)
        throw std::invalid_argument("lower bounds start from e(0) = -w0 e_max");
    if (kind == Kind::upper_bound && origin != Origin::zero_at_origin)
        throw std::invalid_argument("upper bounds start from e(0) = 0");
}

Variant Variant::parse(const std::string& name) {
    if (name == "approx0") return approx0();
    if (name == "approxw") return approxw();
    if (name == "lower") return lower();
    if (name == "upper") return upper();
    throw std::invalid_argument("unknown variant '" + name + "'");
}

std::string Variant::name() const {
    switch (kind_) {
        case Kind::lower_bound: return "lower";
        case Kind::upper_bound: return "upper";
        default: return origin_ == Origin::zero_at_origin ? "approx0" : "approxw";
    }
}

int extrema_count(ErrorMeasure m, Kind k, int N) {
    const int base = m == ErrorMeasure::absolute ? 2 * N : 2 * N - 1;
    return k == Kind::upper_bound ? base - 1 : base;
}

SolveSpec SolveSpec::make(TargetPoly target, ErrorMeasure m, Variant v, int N, std::optional<double> x_end,
                          std::vector<double> weights) {
    SolveSpec s;
    s.target = std::move(target);
    s.measure = m;
    s.variant = v;
    s.N = N;
    s.x_end = x_end;
    if (v.kind() == Kind::upper_bound) s.fixed_min_b = 0.5 * s.target.tail_power();
    s.weights = weights.empty() ? std::vector<double>(std::max(s.num_weights(), 1), 1.0) : std::move(weights);
    s.validate();
    return s;
}

bool SolveSpec::uniform() const {
    return std::all_of(weights.begin(), weights.end(), [](double w) { return w == 1.0; });
}

void SolveSpec::validate() const {
    if (N < 1 || N > kMaxTerms) throw std::invalid_argument("N must be in [1, 25]");
    if (K() < 0) throw std::invalid_argument("invalid extrema count");
    if (static_cast<int>(weights.size()) != num_weights())
        throw std::invalid_argument("expected " + std::to_string(num_weights()) + " weights, got " +
                                    std::to_string(weights.size()));
    bool has_one = false;
    for (double w : weights) {
        if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("weights must lie in (0, 1]");
        has_one = has_one || w == 1.0;
    }
    if (!has_one) throw std::invalid_argument("at least one weight must equal 1");
    if (measure == ErrorMeasure::relative) {
        if (!x_end) throw std::invalid_argument("relative measure needs x_end");
        if (!(*x_end >= 0.5 && *x_end <= 20.0)) throw std::invalid_argument("x_end must lie in [0.5, 20]");
        if (!(target.at_origin() > 0.0)) throw std::invalid_argument("relative measure needs a positive target");
    } else if (x_end) {
        throw std::invalid_argument("x_end applies to the relative measure only");
    }
    if (variant.kind() == Kind::upper_bound) {
        if (!fixed_min_b || !(*fixed_min_b > 0.0)) throw std::invalid_argument("upper bounds need fixed_min_b");
    } else if (fixed_min_b) {
        throw std::invalid_argument("fixed_min_b applies to upper bounds only");
    }
}

int SolveSpec::num_unknowns() const { return 2 * N - (fixed_min_b ? 1 : 0) + K() + 1; }

namespace detail {

std::vector<double> value_levels(const SolveSpec& spec) {
    const int K = spec.K();
    std::vector<double> lv(K);
    for (int k = 1; k <= K; ++k) {
        const double w = spec.weights[k];
        const bool odd = k % 2 == 1;
        switch (spec.variant.kind()) {
            case Kind::approximation: lv[k - 1] = odd ? w : -w; break;
            case Kind::lower_bound: lv[k - 1] = odd ? 0.0 : -w; break;
            case Kind::upper_bound: lv[k - 1] = odd ? w : 0.0; break;
        }
    }
    return lv;
}

System make_system(const SolveSpec& spec, bool eliminate) {
    System s;
    s.target = spec.target;
    s.measure = spec.measure;
    s.N = spec.N;
    s.K = spec.K();
    s.fixed_b1 = spec.fixed_min_b;
    s.level = value_levels(spec);
    s.origin_level = spec.variant.origin() == Origin::weighted_at_origin ? -spec.weights[0] : 0.0;
    if (spec.measure == ErrorMeasure::relative) {
        s.x_end = *spec.x_end;
        const double we = spec.weights[s.K + 1];
        s.end_level = spec.variant.kind() == Kind::upper_bound ? we : -we;
    }
    if (eliminate) {
        for (int k = 0; k < s.K; ++k)
            if (s.level[k] != 0.0) {
                s.elim_row = k;
                break;
            }
        if (s.elim_row < 0) throw std::invalid_argument("no nonzero value row to eliminate e_max with");
    }
    return s;
}

namespace {

struct PointEval {
    double e = 0, de = 0, d2e = 0;
    std::vector<double> ea, eb, dea, deb;
};

// Error value and derivatives at x plus their gradients in a and b.
bool point_eval(const System& sys, const std::vector<double>& a, const std::vector<double>& b, double x,
                bool grads, PointEval& pe) {
    const int N = sys.N;
    const double x2 = x * x;
    double S = 0, S1 = 0, S2 = 0;
    if (grads) {
        pe.ea.assign(N, 0.0);
        pe.eb.assign(N, 0.0);
        pe.dea.assign(N, 0.0);
        pe.deb.assign(N, 0.0);
    }
    for (int n = 0; n < N; ++n) {
        const double E = std::exp(-b[n] * x2);
        const double aE = a[n] * E;
        S += aE;
        S1 += b[n] * aE;
        S2 += (4.0 * b[n] * b[n] * x2 - 2.0 * b[n]) * aE;
        if (grads) {
            pe.ea[n] = E;
            pe.eb[n] = -x2 * aE;
            pe.dea[n] = -2.0 * x * b[n] * E;
            pe.deb[n] = -2.0 * x * aE * (1.0 - b[n] * x2);
        }
    }
    S1 *= -2.0 * x;
    const double qv = q(x), qp = q_prime(x);
    const TargetPoly& t = sys.target;
    const double T = t.is_identity() ? qv : t.omega(qv);
    const double T1 = t.omega_prime(qv) * qp;
    const double T2 = t.omega_second(qv) * qp * qp - t.omega_prime(qv) * x * qp;
    if (!sys.relative()) {
        pe.e = S - T;
        pe.de = S1 - T1;
        pe.d2e = S2 - T2;
        return std::isfinite(pe.e) && std::isfinite(pe.de) && std::isfinite(pe.d2e);
    }
    if (!(std::fabs(T) >= kTargetFloor)) return false;
    const double s0 = S / T, s1 = S1 / T, s2 = S2 / T, t1 = T1 / T, t2 = T2 / T;
    pe.e = s0 - 1.0;
    pe.de = s1 - s0 * t1;
    pe.d2e = s2 - 2.0 * s1 * t1 - s0 * t2 + 2.0 * s0 * t1 * t1;
    if (grads) {
        for (int n = 0; n < N; ++n) {
            pe.dea[n] = (pe.dea[n] - pe.ea[n] * t1) / T;
            pe.deb[n] = (pe.deb[n] - pe.eb[n] * t1) / T;
            pe.ea[n] /= T;
            pe.eb[n] /= T;
        }
    }
    return std::isfinite(pe.e) && std::isfinite(pe.de) && std::isfinite(pe.d2e);
}

void unpack_abx(const System& sys, const Eigen::VectorXd& u, Params& p) {
    const int N = sys.N, K = sys.K;
    p.a.resize(N);
    p.b.resize(N);
    p.x.resize(K);
    int i = 0;
    for (int n = 0; n < N; ++n) p.a[n] = std::exp(u(i++));
    p.b[0] = sys.fixed_b1 ? *sys.fixed_b1 : std::exp(u(i++));
    for (int n = 1; n < N; ++n) p.b[n] = p.b[n - 1] * (1.0 + std::exp(u(i++)));
    for (int k = 0; k < K; ++k) p.x[k] = (k ? p.x[k - 1] : 0.0) + std::exp(u(i++));
}

double origin_row_target(const System& sys, double e) {
    const double T0 = sys.target.at_origin();
    return sys.relative() ? T0 * (1.0 + sys.origin_level * e) : T0 + sys.origin_level * e;
}

}  // namespace

Params unpack(const System& sys, const Eigen::VectorXd& u) {
    Params p;
    unpack_abx(sys, u, p);
    if (sys.elim_row >= 0) {
        PointEval pe;
        point_eval(sys, p.a, p.b, p.x[sys.elim_row], false, pe);
        p.e = pe.e / sys.level[sys.elim_row];
    } else {
        p.e = std::exp(u(sys.nu() - 1));
    }
    return p;
}

Eigen::VectorXd pack(const System& sys, const Params& p) {
    const int N = sys.N, K = sys.K;
    Eigen::VectorXd u(sys.nu());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (static_cast<int>(p.a.size()) != N || static_cast<int>(p.b.size()) != N ||
        static_cast<int>(p.x.size()) != K) {
        u.setConstant(nan);
        return u;
    }
    int i = 0;
    for (int n = 0; n < N; ++n) u(i++) = std::log(p.a[n]);
    if (!sys.fixed_b1) u(i++) = std::log(p.b[0]);
    for (int n = 1; n < N; ++n) u(i++) = std::log(p.b[n] / p.b[n - 1] - 1.0);
    for (int k = 0; k < K; ++k) u(i++) = std::log(p.x[k] - (k ? p.x[k - 1] : 0.0));
    if (sys.elim_row < 0) u(i++) = std::log(p.e);
    return u;
}

bool evaluate(const System& sys, const Eigen::VectorXd& u, Eigen::VectorXd& f, Eigen::MatrixXd* J,
              Eigen::VectorXd* scale) {
    const int N = sys.N, K = sys.K;
    const bool rel = sys.relative();
    const bool grads = J != nullptr;
    Params p;
    unpack_abx(sys, u, p);
    for (double v : p.a)
        if (!std::isfinite(v) || v <= 0) return false;
    for (double v : p.b)
        if (!std::isfinite(v) || v <= 0) return false;
    for (double v : p.x)
        if (!std::isfinite(v) || v <= 0) return false;

    std::vector<PointEval> pts(K);
    for (int k = 0; k < K; ++k)
        if (!point_eval(sys, p.a, p.b, p.x[k], grads, pts[k])) return false;
    PointEval pend;
    if (rel && !point_eval(sys, p.a, p.b, sys.x_end, grads, pend)) return false;

    double e;
    if (sys.elim_row >= 0)
        e = pts[sys.elim_row].e / sys.level[sys.elim_row];
    else
        e = std::exp(u(sys.nu() - 1));
    if (!std::isfinite(e)) return false;

    const int rows = 2 * K + 1 + (rel ? 1 : 0);
    Eigen::VectorXd F(rows);
    double suma = 0.0;
    for (double v : p.a) suma += v;
    for (int k = 0; k < K; ++k) {
        F(k) = pts[k].de;
        F(K + k) = pts[k].e - sys.level[k] * e;
    }
    F(2 * K) = origin_row_target(sys, e) - suma;
    if (rel) F(2 * K + 1) = pend.e - sys.end_level * e;

    const int drop = sys.elim_row >= 0 ? K + sys.elim_row : -1;
    auto keep_rows = [&](const Eigen::VectorXd& v) {
        if (drop < 0) return v;
        Eigen::VectorXd r(v.size() - 1);
        for (int i = 0, j = 0; i < v.size(); ++i)
            if (i != drop) r(j++) = v(i);
        return r;
    };
    f = keep_rows(F);
    if (!f.allFinite()) return false;

    if (scale) {
        Eigen::VectorXd sc = Eigen::VectorXd::Ones(rows);
        for (int k = 0; k < K; ++k) sc(k) = p.x[k];
        *scale = keep_rows(sc);
    }
    if (!J) return true;

    // Jacobian in original parameters: columns a (N), b (N), x (K), e (1).
    const int np = 2 * N + K + 1;
    const int ca = 0, cb = N, cx = 2 * N, ce = 2 * N + K;
    Eigen::MatrixXd Jp = Eigen::MatrixXd::Zero(rows, np);
    for (int k = 0; k < K; ++k) {
        for (int n = 0; n < N; ++n) {
            Jp(k, ca + n) = pts[k].dea[n];
            Jp(k, cb + n) = pts[k].deb[n];
            Jp(K + k, ca + n) = pts[k].ea[n];
            Jp(K + k, cb + n) = pts[k].eb[n];
        }
        Jp(k, cx + k) = pts[k].d2e;
        Jp(K + k, cx + k) = pts[k].de;
        Jp(K + k, ce) = -sys.level[k];
    }
    for (int n = 0; n < N; ++n) Jp(2 * K, ca + n) = -1.0;
    Jp(2 * K, ce) = rel ? sys.target.at_origin() * sys.origin_level : sys.origin_level;
    if (rel) {
        for (int n = 0; n < N; ++n) {
            Jp(2 * K + 1, ca + n) = pend.ea[n];
            Jp(2 * K + 1, cb + n) = pend.eb[n];
        }
        Jp(2 * K + 1, ce) = -sys.end_level;
    }

    // Chain rule to the transformed unknowns (e column last).
    const int nfull = sys.num_ab() + K + 1;
    Eigen::MatrixXd Ju(rows, nfull);
    int c = 0;
    for (int n = 0; n < N; ++n) Ju.col(c++) = Jp.col(ca + n) * p.a[n];
    {
        // b_n depends on beta_j for j <= n with d log b_n / d beta_j = g_j
        Eigen::MatrixXd suffix = Eigen::MatrixXd::Zero(rows, N + 1);
        for (int n = N - 1; n >= 0; --n) suffix.col(n) = suffix.col(n + 1) + Jp.col(cb + n) * p.b[n];
        for (int j = sys.fixed_b1 ? 1 : 0; j < N; ++j) {
            const double g = j == 0 ? 1.0 : (p.b[j] - p.b[j - 1]) / p.b[j];
            Ju.col(c++) = suffix.col(j) * g;
        }
    }
    {
        Eigen::MatrixXd suffix = Eigen::MatrixXd::Zero(rows, K + 1);
        for (int k = K - 1; k >= 0; --k) suffix.col(k) = suffix.col(k + 1) + Jp.col(cx + k);
        for (int j = 0; j < K; ++j) Ju.col(c++) = suffix.col(j) * (p.x[j] - (j ? p.x[j - 1] : 0.0));
    }
    Ju.col(c++) = Jp.col(ce) * e;

    if (drop < 0) {
        *J = std::move(Ju);
        return J->allFinite();
    }
    // e = g(u) / level: d e / d u is the dropped row over the level.
    const int nu = nfull - 1;
    Eigen::RowVectorXd dedu = Ju.row(drop).head(nu) / sys.level[sys.elim_row];
    J->resize(rows - 1, nu);
    for (int i = 0, r = 0; i < rows; ++i) {
        if (i == drop) continue;
        J->row(r++) = Ju.row(i).head(nu) + Jp(i, ce) * dedu;
    }
    return J->allFinite();
}

NewtonResult newton(const System& sys, Eigen::VectorXd u, int max_iterations, double stop_tol) {
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd f, sc, fn, scn;
    Eigen::MatrixXd J;
    if (!evaluate(sys, u, f, &J, &sc)) return {u, 0, inf};
    NewtonResult best{u, 0, f.lpNorm<Eigen::Infinity>()};
    for (int it = 0; it < max_iterations; ++it) {
        const double nf = f.lpNorm<Eigen::Infinity>();
        if (nf < best.norm) best = {u, it, nf};
        if (nf <= stop_tol) return {u, it, nf};
        // row equilibration; keep every pivot so tiny ones still move the solution
        const Eigen::VectorXd rs = J.rowwise().lpNorm<Eigen::Infinity>().cwiseMax(1e-300).cwiseInverse();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(rs.asDiagonal() * J);
        qr.setThreshold(0.0);
        Eigen::VectorXd du = qr.solve(-(rs.asDiagonal() * f));
        if (!du.allFinite()) break;
        const double m0 = f.cwiseProduct(sc).norm();
        double lam = 1.0;
        bool ok = false;
        Eigen::VectorXd un;
        while (lam > 1e-10) {
            un = u + lam * du;
            if (evaluate(sys, un, fn, nullptr, &scn) && fn.cwiseProduct(scn).norm() < (1.0 - 1e-4 * lam) * m0) {
                ok = true;
                break;
            }
            lam *= 0.5;
        }
        if (!ok) break;
        u = un;
        if (!evaluate(sys, u, f, &J, &sc)) break;
        best.iterations = it + 1;
    }
    if (f.size() && f.allFinite() && f.lpNorm<Eigen::Infinity>() < best.norm)
        best = {u, max_iterations, f.lpNorm<Eigen::Infinity>()};
    return best;
}

double origin_sum(const SolveSpec& spec, double e) {
    const double T0 = spec.target.at_origin();
    if (spec.variant.origin() == Origin::zero_at_origin) return T0;
    const double w0 = spec.weights[0];
    return spec.measure == ErrorMeasure::relative ? T0 * (1.0 - w0 * e) : T0 - w0 * e;
}

bool plausible(const SolveSpec& spec, const Params& p) {
    if (!(std::isfinite(p.e) && p.e > 1e-300)) return false;
    if (spec.measure == ErrorMeasure::relative && !p.x.empty() && !(p.x.back() < *spec.x_end)) return false;
    try {
        ExpSum s(p.a, p.b);
        const double hi = scan_hi(spec, p.x);
        std::vector<Extremum> ex = find_extrema(s, spec.target, spec.measure, 0.0, hi);
        if (spec.measure == ErrorMeasure::relative)
            std::erase_if(ex, [&](const Extremum& z) { return !(z.x < *spec.x_end); });
        if (static_cast<int>(ex.size()) != spec.K()) return false;
        double wmax = 0.0;
        if (spec.variant.origin() == Origin::weighted_at_origin) wmax = spec.weights[0];
        const auto lv = value_levels(spec);
        for (double l : lv) wmax = std::max(wmax, std::fabs(l));
        if (spec.measure == ErrorMeasure::relative) wmax = std::max(wmax, spec.weights[spec.K() + 1]);
        const double measured = max_error(s, spec.target, spec.measure, 0.0, hi);
        return std::fabs(measured - wmax * p.e) <= 1e-6 * wmax * p.e;
    } catch (const std::exception&) {
        return false;
    }
}

MinimaxSolution finish(const SolveSpec& spec, const Params& p, const NewtonResult& nr, const std::string& source) {
    MinimaxSolution sol{ExpSum(p.a, p.b), p.e, p.x, spec, {nr.iterations, nr.norm, source}};
    return sol;
}

std::optional<Eigen::VectorXd> homotopy(const std::function<System(double)>& path, const std::vector<double>& ts,
                                        Eigen::VectorXd u) {
    std::vector<double> todo(ts.rbegin(), ts.rend());
    double cur = 0.0;
    while (!todo.empty()) {
        const double t = todo.back();
        const System sys = path(t);
        NewtonResult nr = newton(sys, u, 60, 1e-13);
        if (nr.norm < 1e-11) {
            u = nr.u;
            cur = t;
            todo.pop_back();
        } else {
            if (t - cur < 1e-5) return std::nullopt;
            todo.push_back(0.5 * (cur + t));
        }
    }
    return u;
}

std::optional<MinimaxSolution> solve_from_candidates(const SolveSpec& spec, const std::vector<CandidateGen>& gens,
                                                     const SolveOptions& opt, double* best_norm) {
    const System sys = make_system(spec, false);
    std::optional<Params> first;
    double best = std::numeric_limits<double>::infinity();
    auto attempt = [&](const Params& p0, const std::string& src) -> std::optional<MinimaxSolution> {
        Eigen::VectorXd u = pack(sys, p0);
        if (!u.allFinite()) return std::nullopt;
        NewtonResult nr = newton(sys, u, opt.max_iterations, 1e-13);
        best = std::min(best, nr.norm);
        if (!(nr.norm <= opt.tolerance)) return std::nullopt;
        Params p = unpack(sys, nr.u);
        if (!plausible(spec, p)) return std::nullopt;
        return finish(spec, p, nr, src);
    };
    for (const CandidateGen& g : gens) {
        std::optional<Candidate> c = g();
        if (!c) continue;
        if (!first && pack(sys, c->p).allFinite()) first = c->p;
        if (auto sol = attempt(c->p, c->source)) {
            if (best_norm) *best_norm = best;
            return sol;
        }
    }
    if (first) {
        std::mt19937_64 rng(0x5eedULL + 977ULL * spec.N);
        std::uniform_real_distribution<double> jitter(-0.05, 0.05);
        for (int r = 0; r < opt.restarts; ++r) {
            Params p = *first;
            for (double& v : p.a) v *= 1.0 + jitter(rng);
            for (std::size_t n = 0; n < p.b.size(); ++n)
                if (!(n == 0 && spec.fixed_min_b)) p.b[n] *= 1.0 + jitter(rng);
            for (double& v : p.x) v *= 1.0 + jitter(rng);
            p.e *= 1.0 + jitter(rng);
            std::sort(p.b.begin() + (spec.fixed_min_b ? 1 : 0), p.b.end());
            std::sort(p.x.begin(), p.x.end());
            if (auto sol = attempt(p, "restart" + std::to_string(r + 1))) {
                if (best_norm) *best_norm = best;
                return sol;
            }
        }
    }
    if (best_norm) *best_norm = best;
    return std::nullopt;
}

std::optional<MinimaxSolution> Continuation::get(const Variant& v, int N) {
    auto& chain = cache_[v.name()];
    while (static_cast<int>(chain.size()) < N) {
        const int n = static_cast<int>(chain.size()) + 1;
        SolveSpec spec = SolveSpec::make(target_, measure_, v, n, x_end_);
        std::vector<MinimaxSolution> prior;
        for (const auto& s : chain)
            if (s) prior.push_back(*s);
        Companion comp = [this](const Variant& v2, int n2) { return get(v2, n2); };
        double best = 0.0;
        auto gens = candidates(spec, prior, comp);
        if (x_end_ && *x_end_ != kXendBase)
            gens.push_back([this, &spec, &v, n]() -> std::optional<Candidate> { return from_base(spec, v, n); });
        auto sol = solve_from_candidates(spec, gens, opt_, &best);
        if (!sol) {
            std::ostringstream os;
            os << v.name() << " N=" << n << ": no candidate converged (best residual " << best << ")";
            last_error_ = os.str();
        }
        // re-fetch: recursive companion calls may have touched the map
        cache_[v.name()].push_back(std::move(sol));
    }
    return cache_[v.name()][N - 1];
}

std::optional<Candidate> Continuation::from_base(const SolveSpec& spec, const Variant& v, int n) {
    // endpoints further away fall back in factors of two, each level in turn
    const double xe = *spec.x_end;
    const double base = xe < kXendBase ? std::min(kXendBase, 2.0 * xe) : std::max(kXendBase, 0.5 * xe);
    if (!base_) base_ = std::make_unique<Continuation>(target_, measure_, base, opt_);
    auto B = base_->get(v, n);
    if (!B) return std::nullopt;
    auto path = [&](double t) {
        SolveSpec s = spec;
        s.x_end = base * std::pow(xe / base, t);
        return make_system(s);
    };
    Params p{B->expsum.a(), B->expsum.b(), B->extrema, B->e_max};
    std::vector<double> ts;
    for (int i = 1; i <= 10; ++i) ts.push_back(i / 10.0);
    auto u = homotopy(path, ts, pack(path(0.0), p));
    if (!u) return std::nullopt;
    return Candidate{"xend", unpack(path(1.0), *u)};
}

namespace {

// Walks the weights from all-ones to the requested vector.
std::optional<MinimaxSolution> reweight(const SolveSpec& spec, const MinimaxSolution& uniform,
                                        const SolveOptions& opt) {
    auto spec_at = [&](double t) {
        SolveSpec s = spec;
        for (std::size_t i = 0; i < s.weights.size(); ++i) s.weights[i] = 1.0 + t * (spec.weights[i] - 1.0);
        return s;
    };
    auto path = [&](double t) { return make_system(spec_at(t), false); };
    Params p0{uniform.expsum.a(), uniform.expsum.b(), uniform.extrema, uniform.e_max};
    auto u = homotopy(path, {0.25, 0.5, 0.75, 1.0}, pack(path(0.0), p0));
    if (!u) return std::nullopt;
    const System sys = make_system(spec, false);
    NewtonResult nr = newton(sys, *u, opt.max_iterations, 1e-13);
    if (!(nr.norm <= opt.tolerance)) return std::nullopt;
    Params p = unpack(sys, nr.u);
    if (!plausible(spec, p)) return std::nullopt;
    return finish(spec, p, nr, uniform.diagnostics.guess_source + "+weights");
}

std::optional<MinimaxSolution> eliminated(const SolveSpec& spec, const Params& start, const SolveOptions& opt) {
    const System sys = make_system(spec, true);
    NewtonResult nr = newton(sys, pack(sys, start), opt.max_iterations, 1e-13);
    if (!(nr.norm <= opt.tolerance)) return std::nullopt;
    Params p = unpack(sys, nr.u);
    if (!plausible(spec, p)) return std::nullopt;
    return finish(spec, p, nr, "eliminated");
}

}  // namespace

}  // namespace detail

Eigen::VectorXd pack(const SolveSpec& spec, const Params& p) { return detail::pack(detail::make_system(spec), p); }

Params unpack(const SolveSpec& spec, const Eigen::VectorXd& u) {
    const detail::System sys = detail::make_system(spec);
    if (u.size() != sys.nu()) throw std::invalid_argument("unknown vector has wrong dimension");
    return detail::unpack(sys, u);
}

Eigen::VectorXd residuals(const SolveSpec& spec, const Eigen::VectorXd& u) {
    const detail::System sys = detail::make_system(spec);
    if (u.size() != sys.nu()) throw std::invalid_argument("unknown vector has wrong dimension");
    Eigen::VectorXd f;
    if (!detail::evaluate(sys, u, f, nullptr, nullptr))
        f = Eigen::VectorXd::Constant(sys.neq(), std::numeric_limits<double>::quiet_NaN());
    return f;
}

Eigen::MatrixXd jacobian(const SolveSpec& spec, const Eigen::VectorXd& u) {
    const detail::System sys = detail::make_system(spec);
    if (u.size() != sys.nu()) throw std::invalid_argument("unknown vector has wrong dimension");
    Eigen::VectorXd f;
    Eigen::MatrixXd J;
    if (!detail::evaluate(sys, u, f, &J, nullptr))
        J = Eigen::MatrixXd::Constant(sys.neq(), sys.nu(), std::numeric_limits<double>::quiet_NaN());
    return J;
}

MinimaxSolution solve(const SolveSpec& spec, const std::optional<Eigen::VectorXd>& guess, const SolveOptions& opt) {
    spec.validate();
    if (guess) {
        const detail::System full = detail::make_system(spec, false);
        if (guess->size() != full.nu()) throw std::invalid_argument("guess has wrong dimension");
        Params p0 = detail::unpack(full, *guess);
        if (opt.eliminate_emax) {
            if (auto s = detail::eliminated(spec, p0, opt)) return *s;
            throw SolverError("solve: no convergence from the supplied guess", std::nan(""));
        }
        std::vector<detail::CandidateGen> gens{[p0]() { return std::optional<detail::Candidate>({"guess", p0}); }};
        double best = 0.0;
        if (auto s = detail::solve_from_candidates(spec, gens, opt, &best)) return *s;
        throw SolverError("solve: no convergence from the supplied guess", best);
    }
    SolveOptions chain_opt = opt;
    chain_opt.eliminate_emax = false;
    detail::Continuation cont(spec.target, spec.measure, spec.x_end, chain_opt);
    std::optional<MinimaxSolution> base = cont.get(spec.variant, spec.N);
    if (!base) throw SolverError("solve: continuation failed: " + cont.last_error(), std::nan(""));
    if (!spec.uniform()) {
        base = detail::reweight(spec, *base, opt);
        if (!base) throw SolverError("solve: weight continuation failed", std::nan(""));
    }
    if (opt.eliminate_emax) {
        Params p0{base->expsum.a(), base->expsum.b(), base->extrema, base->e_max};
        auto s = detail::eliminated(spec, p0, opt);
        if (!s) throw SolverError("solve: eliminated system did not converge", std::nan(""));
        return *s;
    }
    base->spec = spec;
    return *base;
}

std::vector<SweepEntry> sweep(const std::vector<SolveSpec>& specs, const SolveOptions& opt) {
    std::vector<SweepEntry> out;
    if (specs.empty()) return out;
    const SolveSpec& f = specs.front();
    SolveOptions chain_opt = opt;
    chain_opt.eliminate_emax = false;
    detail::Continuation cont(f.target, f.measure, f.x_end, chain_opt);
    int lastN = 0;
    for (const SolveSpec& s : specs) {
        SweepEntry e{s, std::nullopt, {}};
        try {
            s.validate();
            if (!(s.target == f.target) || s.measure != f.measure || !(s.variant == f.variant) || s.x_end != f.x_end)
                throw std::invalid_argument("sweep specs must share target, measure, variant and x_end");
            if (s.N < lastN) throw std::invalid_argument("sweep specs must ascend in N");
            lastN = s.N;
            std::optional<MinimaxSolution> sol = cont.get(s.variant, s.N);
            if (!sol) throw SolverError(cont.last_error(), std::nan(""));
            if (!s.uniform()) {
                sol = detail::reweight(s, *sol, opt);
                if (!sol) throw SolverError("weight continuation failed", std::nan(""));
            }
            sol->spec = s;
            e.solution = std::move(sol);
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace qmm
