#include "qmm/fading.hpp"

#include <cmath>
#include <stdexcept>

#include "qmm/gauss_legendre.hpp"
#include "qmm/special_fn.hpp"

namespace qmm {

void NakagamiChannel::validate() const {
    if (!(m >= 0.5) || !std::isfinite(m)) throw std::invalid_argument("Nakagami m must be >= 0.5");
    if (!(mean_snr > 0.0) || !std::isfinite(mean_snr)) throw std::invalid_argument("mean SNR must be positive");
}

double sep_4qam_conditional(double snr) {
    if (!(snr >= 0.0)) throw std::domain_error("snr must be >= 0");
    const double qv = q(std::sqrt(snr));
    return 2.0 * qv - qv * qv;
}

double sep_average_closed(const ExpSum& s, const NakagamiChannel& ch, double alpha) {
    ch.validate();
    const double r = ch.m / ch.mean_snr;
    double acc = 0.0;
    for (const Term& t : s.terms()) acc += t.a * std::pow(t.b * alpha * alpha + r, -ch.m);
    return std::pow(r, ch.m) * acc;
}

double mgf_gamma(const NakagamiChannel& ch, double s) {
    ch.validate();
    if (!(s < ch.m / ch.mean_snr)) throw std::domain_error("mgf_gamma: s outside the convergence region");
    return std::pow(1.0 - s * ch.mean_snr / ch.m, -ch.m);
}

namespace {

struct Integrand {
    const TargetPoly* t;
    double alpha, m, g, logc;
    double operator()(double x) const {
        if (x <= 0.0) return 0.0;
        const double dens = std::exp(logc + (2.0 * m - 1.0) * std::log(x) - m * x * x / g);
        return t->omega(q(alpha * x)) * dens;
    }
};

double gl(const Integrand& f, const GaussRule& r, double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
    return h * s;
}

double adapt(const Integrand& f, const GaussRule& r, double lo, double hi, double whole, double tol, int depth) {
    const double mid = 0.5 * (lo + hi);
    const double left = gl(f, r, lo, mid), right = gl(f, r, mid, hi);
    if (std::fabs(left + right - whole) <= tol) return left + right;
    if (depth >= 40) throw std::runtime_error("sep_average_exact: integration did not converge");
    return adapt(f, r, lo, mid, left, 0.5 * tol, depth + 1) + adapt(f, r, mid, hi, right, 0.5 * tol, depth + 1);
}

}  // namespace

double sep_average_exact(const NakagamiChannel& ch, const TargetPoly& target, double alpha) {
    ch.validate();
    const double m = ch.m, g = ch.mean_snr;
    // gamma density in x = sqrt(snr): 2 (m/g)^m x^(2m-1) exp(-m x^2/g) / Gamma(m)
    Integrand f{&target, alpha, m, g, m * std::log(m / g) - std::lgamma(m) + std::log(2.0)};
    const double X = std::sqrt(g * (m + 40.0 * std::sqrt(m)) / m);
    static const GaussRule r = gauss_legendre(20);
    // start from a few panels so narrow densities are not skipped
    const int panels = 16;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double lo = X * i / panels, hi = X * (i + 1) / panels;
        total += adapt(f, r, lo, hi, gl(f, r, lo, hi), 1e-10 / panels, 0);
    }
    return total;
}

}  // namespace qmm
