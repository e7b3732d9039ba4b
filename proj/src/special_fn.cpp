#include "qmm/special_fn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qmm/gauss_legendre.hpp"

namespace qmm {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

void require_finite(double x, const char* who) {
    if (!std::isfinite(x)) throw std::domain_error(std::string(who) + ": non-finite argument");
}

// Normal density with the exponent split so exp(-x^2/2) keeps full relative
// accuracy for large x (x*x alone loses ~x^2 ulps).
double phi(double x) {
    const double xh = std::floor(x * 65536.0) / 65536.0;
    const double xl = x - xh;
    return kInvSqrt2Pi * std::exp(-0.5 * xh * xh) * std::exp(-0.5 * xl * (x + xh));
}

}  // namespace

double q(double x) {
    require_finite(x, "q");
    if (x < 0.0) throw std::domain_error("q: negative argument");
    if (x == 0.0) return 0.5;
    if (x < 1.25) {
        // Phi(x) - 1/2 = phi(x) * sum x^(2n+1) / (2n+1)!!
        const double x2 = x * x;
        double term = x, s = x;
        for (int n = 1; n < 200; ++n) {
            term *= x2 / (2.0 * n + 1.0);
            s += term;
            if (term <= 1e-17 * s) break;
        }
        return 0.5 - phi(x) * s;
    }
    // Laplace continued fraction for the Mills ratio, evaluated backwards.
    const int depth = 8 + static_cast<int>(1500.0 / (x * x));
    double t = x;
    for (int k = depth; k >= 1; --k) t = x + k / t;
    return phi(x) / t;
}

double q_prime(double x) {
    require_finite(x, "q_prime");
    return -phi(std::fabs(x));
}

double q_craig_oracle(double x, int nodes) {
    require_finite(x, "q_craig_oracle");
    if (x < 0.0) throw std::domain_error("q_craig_oracle: negative argument");
    if (nodes < 4) throw std::invalid_argument("q_craig_oracle: nodes must be >= 4");
    if (x == 0.0) return 0.5;
    // Panels halve toward theta = 0 so the layer where the integrand switches on
    // (sin theta ~ x) is resolved for small x; below sin theta = x / sqrt(1500)
    // the integrand is under exp(-750).
    const double cut = x / std::sqrt(1500.0);
    double s = 0.0, hi = std::numbers::pi / 2;
    while (hi > 0.0) {
        const double lo = std::sin(hi / 2) > cut ? hi / 2 : 0.0;
        const GaussRule r = gauss_legendre(nodes, lo, hi);
        for (int i = 0; i < nodes; ++i) {
            const double st = std::sin(r.nodes[i]);
            s += r.weights[i] * std::exp(-x * x / (2.0 * st * st));
        }
        hi = lo;
    }
    return s / std::numbers::pi;
}

}  // namespace qmm
