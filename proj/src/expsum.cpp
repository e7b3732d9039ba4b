#include "qmm/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qmm/special_fn.hpp"

namespace qmm {

ExpSum::ExpSum(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("ExpSum: no terms");
    for (const Term& t : terms_) {
        if (!(t.a > 0.0) || !std::isfinite(t.a)) throw std::invalid_argument("ExpSum: a must be positive");
        if (!(t.b > 0.0) || !std::isfinite(t.b)) throw std::invalid_argument("ExpSum: b must be positive");
    }
    std::sort(terms_.begin(), terms_.end(), [](const Term& l, const Term& r) { return l.b < r.b; });
    for (std::size_t i = 1; i < terms_.size(); ++i)
        if (!(terms_[i].b > terms_[i - 1].b))
            throw std::invalid_argument("ExpSum: duplicate b = " + std::to_string(terms_[i].b));
}

static std::vector<Term> zip_terms(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("ExpSum: a and b differ in length");
    std::vector<Term> t(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) t[i] = {a[i], b[i]};
    return t;
}

ExpSum::ExpSum(const std::vector<double>& a, const std::vector<double>& b) : ExpSum(zip_terms(a, b)) {}

std::vector<double> ExpSum::a() const {
    std::vector<double> v;
    for (const Term& t : terms_) v.push_back(t.a);
    return v;
}

std::vector<double> ExpSum::b() const {
    std::vector<double> v;
    for (const Term& t : terms_) v.push_back(t.b);
    return v;
}

double ExpSum::sum_a() const {
    double s = 0.0;
    for (const Term& t : terms_) s += t.a;
    return s;
}

TargetPoly::TargetPoly(std::vector<double> c) : c_(std::move(c)) {
    if (c_.size() < 2) throw std::invalid_argument("TargetPoly: degree must be >= 1");
    if (c_.back() == 0.0) throw std::invalid_argument("TargetPoly: leading coefficient is zero");
    for (double v : c_)
        if (!std::isfinite(v)) throw std::invalid_argument("TargetPoly: non-finite coefficient");
}

TargetPoly TargetPoly::power(int p) {
    if (p < 1) throw std::invalid_argument("TargetPoly::power: p must be >= 1");
    std::vector<double> c(p + 1, 0.0);
    c[p] = 1.0;
    return TargetPoly(std::move(c));
}

int TargetPoly::tail_power() const {
    for (std::size_t p = 0; p < c_.size(); ++p)
        if (c_[p] != 0.0) return static_cast<int>(p);
    return degree();
}

bool TargetPoly::is_identity() const { return c_.size() == 2 && c_[0] == 0.0 && c_[1] == 1.0; }

double TargetPoly::omega(double qv) const {
    double r = 0.0;
    for (std::size_t p = c_.size(); p-- > 0;) r = r * qv + c_[p];
    return r;
}

double TargetPoly::omega_prime(double qv) const {
    double r = 0.0;
    for (std::size_t p = c_.size(); p-- > 1;) r = r * qv + p * c_[p];
    return r;
}

double TargetPoly::omega_second(double qv) const {
    double r = 0.0;
    for (std::size_t p = c_.size(); p-- > 2;) r = r * qv + p * (p - 1.0) * c_[p];
    return r;
}

double eval(const ExpSum& s, double x) {
    const double x2 = x * x;
    double r = 0.0;
    for (const Term& t : s.terms()) r += t.a * std::exp(-t.b * x2);
    return r;
}

double eval_prime(const ExpSum& s, double x) {
    const double x2 = x * x;
    double r = 0.0;
    for (const Term& t : s.terms()) r += t.a * t.b * std::exp(-t.b * x2);
    return -2.0 * x * r;
}

double eval_second(const ExpSum& s, double x) {
    const double x2 = x * x;
    double r = 0.0;
    for (const Term& t : s.terms()) r += t.a * (4.0 * t.b * t.b * x2 - 2.0 * t.b) * std::exp(-t.b * x2);
    return r;
}

double target_eval(const TargetPoly& t, double x) {
    if (t.is_identity()) return q(x);
    return t.omega(q(x));
}

double target_prime(const TargetPoly& t, double x) { return t.omega_prime(q(x)) * q_prime(x); }

double target_second(const TargetPoly& t, double x) {
    const double qv = q(x), qp = q_prime(x);
    // Q'' = -x Q'
    return t.omega_second(qv) * qp * qp - t.omega_prime(qv) * x * qp;
}

ErrorValue error_all(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double x) {
    const double x2 = x * x;
    double S = 0.0, S1 = 0.0, S2 = 0.0;
    for (const Term& tm : s.terms()) {
        const double E = tm.a * std::exp(-tm.b * x2);
        S += E;
        S1 += tm.b * E;
        S2 += (4.0 * tm.b * tm.b * x2 - 2.0 * tm.b) * E;
    }
    S1 *= -2.0 * x;
    const double qv = q(x), qp = q_prime(x);
    const double T = t.is_identity() ? qv : t.omega(qv);
    const double T1 = t.omega_prime(qv) * qp;
    const double T2 = t.omega_second(qv) * qp * qp - t.omega_prime(qv) * x * qp;
    if (m == ErrorMeasure::absolute) return {S - T, S1 - T1, S2 - T2};
    if (!(std::fabs(T) >= kTargetFloor))
        throw std::domain_error("relative error: target underflows at x = " + std::to_string(x));
    const double s0 = S / T, s1 = S1 / T, s2 = S2 / T, t1 = T1 / T, t2 = T2 / T;
    return {s0 - 1.0, s1 - s0 * t1, s2 - 2.0 * s1 * t1 - s0 * t2 + 2.0 * s0 * t1 * t1};
}

double error(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double x) {
    const double S = eval(s, x), T = target_eval(t, x);
    if (m == ErrorMeasure::absolute) return S - T;
    if (!(std::fabs(T) >= kTargetFloor))
        throw std::domain_error("relative error: target underflows at x = " + std::to_string(x));
    return S / T - 1.0;
}

double error_prime(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double x) {
    return error_all(s, t, m, x).de;
}

TailClass tail_class(const ExpSum& s, const TargetPoly& t, ErrorMeasure m) {
    if (m == ErrorMeasure::absolute) return TailClass::converges_to_zero_abs;
    // Omega(Q) ~ c_p Q^p ~ exp(-p x^2/2) / x^p, so S/Omega blows up unless every b
    // exceeds p/2; at exactly p/2 the x^p factor still wins.
    const double thr = 0.5 * t.tail_power();
    return s.min_b() > thr ? TailClass::converges_to_minus_one : TailClass::diverges;
}

ExpSum combine_powers(const std::vector<std::pair<ExpSum, int>>& factors) {
    if (factors.empty()) throw std::invalid_argument("combine_powers: no factors");
    double count = 1.0;
    for (const auto& [s, p] : factors) {
        if (p < 1) throw std::invalid_argument("combine_powers: powers must be >= 1");
        count *= std::pow(static_cast<double>(s.size()), p);
    }
    if (count > 1e4) throw std::length_error("combine_powers: more than 1e4 product terms");

    std::vector<Term> acc{{1.0, 0.0}};
    for (const auto& [s, p] : factors) {
        for (int k = 0; k < p; ++k) {
            std::vector<Term> next;
            next.reserve(acc.size() * s.size());
            for (const Term& l : acc)
                for (const Term& r : s.terms()) next.push_back({l.a * r.a, l.b + r.b});
            acc = std::move(next);
        }
    }
    std::sort(acc.begin(), acc.end(), [](const Term& l, const Term& r) { return l.b < r.b; });
    std::vector<Term> merged;
    for (const Term& t : acc) {
        if (!merged.empty() && t.b - merged.back().b <= 1e-12 * t.b)
            merged.back().a += t.a;
        else
            merged.push_back(t);
    }
    return ExpSum(std::move(merged));
}

}  // namespace qmm
