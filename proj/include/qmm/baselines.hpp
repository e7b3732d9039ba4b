#pragma once

#include <string>

#include "qmm/expsum.hpp"

namespace qmm {

enum class RuleKind { legendre, composite_legendre, right_rectangular, trapezoidal };

// A quadrature rule applied to Craig's integral over [0, pi/2].
struct QuadratureRule {
    RuleKind kind = RuleKind::legendre;
    int N = 1;
    int h = 0;  // points per subinterval, composite only

    // "legendre" | "clegendre:h" | "rect" | "trap"
    static QuadratureRule parse(const std::string& name, int N);
    std::string name() const;
    void validate() const;
};

// a_i = w_i / pi, b_i = 1 / (2 sin^2 theta_i). The trapezoidal theta = 0 node is
// dropped, so its sum of a is 1/2 - 1/(4N).
ExpSum quadrature_coeffs(const QuadratureRule& rule);

// Two-term reference set {(1/12, 1/2), (1/4, 2/3)}.
ExpSum chiani_n2();

}  // namespace qmm
