#include "qmm/baselines.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qmm/gauss_legendre.hpp"

namespace qmm {

QuadratureRule QuadratureRule::parse(const std::string& name, int N) {
    QuadratureRule r;
    r.N = N;
    if (name == "legendre") {
        r.kind = RuleKind::legendre;
    } else if (name.rfind("clegendre:", 0) == 0) {
        r.kind = RuleKind::composite_legendre;
        try {
            std::size_t pos = 0;
            r.h = std::stoi(name.substr(10), &pos);
            if (pos != name.size() - 10) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw std::invalid_argument("bad composite rule '" + name + "'");
        }
    } else if (name == "rect") {
        r.kind = RuleKind::right_rectangular;
    } else if (name == "trap") {
        r.kind = RuleKind::trapezoidal;
    } else {
        throw std::invalid_argument("unknown rule '" + name + "'");
    }
    r.validate();
    return r;
}

std::string QuadratureRule::name() const {
    switch (kind) {
        case RuleKind::legendre: return "legendre";
        case RuleKind::composite_legendre: return "clegendre:" + std::to_string(h);
        case RuleKind::right_rectangular: return "rect";
        case RuleKind::trapezoidal: return "trap";
    }
    return "?";
}

void QuadratureRule::validate() const {
    if (N < 1) throw std::invalid_argument("rule needs N >= 1");
    if (kind == RuleKind::composite_legendre && (h < 1 || N % h != 0))
        throw std::invalid_argument("composite Legendre needs N divisible by h");
}

ExpSum quadrature_coeffs(const QuadratureRule& rule) {
    rule.validate();
    constexpr double pi = std::numbers::pi;
    std::vector<Term> t;
    auto add = [&](double theta, double w) {
        const double s = std::sin(theta);
        t.push_back({w / pi, 1.0 / (2.0 * s * s)});
    };
    const int N = rule.N;
    switch (rule.kind) {
        case RuleKind::legendre: {
            const GaussRule g = gauss_legendre(N, 0.0, pi / 2);
            for (int i = 0; i < N; ++i) add(g.nodes[i], g.weights[i]);
            break;
        }
        case RuleKind::composite_legendre: {
            const int m = N / rule.h;
            const double H = pi / 2 / m;
            const GaussRule g = gauss_legendre(rule.h);
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < rule.h; ++i)
                    add(j * H + 0.5 * H * (g.nodes[i] + 1.0), 0.5 * H * g.weights[i]);
            break;
        }
        case RuleKind::right_rectangular: {
            const double h = pi / 2 / N;
            for (int i = 1; i <= N; ++i) add(i * h, h);
            break;
        }
        case RuleKind::trapezoidal: {
            const double h = pi / 2 / N;
            for (int i = 1; i <= N; ++i) add(i * h, i == N ? 0.5 * h : h);
            break;
        }
    }
    return ExpSum(std::move(t));
}

ExpSum chiani_n2() { return ExpSum(std::vector<double>{1.0 / 12.0, 1.0 / 4.0}, std::vector<double>{0.5, 2.0 / 3.0}); }

}  // namespace qmm
