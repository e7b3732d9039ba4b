#pragma once

#include <vector>

namespace qmm {

struct GaussRule {
    std::vector<double> nodes;    // ascending, in (-1, 1)
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1]; Newton on P_n, tolerance 1e-15.
GaussRule gauss_legendre(int n);

// Same rule mapped to [lo, hi].
GaussRule gauss_legendre(int n, double lo, double hi);

}  // namespace qmm
