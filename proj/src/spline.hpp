#pragma once

#include <vector>

namespace qmm::detail {

// Interpolating cubic spline with not-a-knot ends (parabola for 3 points,
// line for 2).
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;

private:
    std::vector<double> x_, y_, m_;  // m_ = second derivatives at knots
};

}  // namespace qmm::detail
