#include "spline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>

namespace qmm::detail {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
    const int n = static_cast<int>(x_.size());
    if (n < 2 || y_.size() != x_.size()) throw std::invalid_argument("CubicSpline: need >= 2 points");
    if (n == 2) return;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    std::vector<double> h(n - 1);
    for (int i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];
    for (int i = 1; i + 1 < n; ++i) {
        A(i, i - 1) = h[i - 1];
        A(i, i) = 2.0 * (h[i - 1] + h[i]);
        A(i, i + 1) = h[i];
        rhs(i) = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    }
    if (n == 3) {
        // both not-a-knot conditions sit on the middle knot: single parabola
        A(0, 0) = 1.0;
        A(0, 1) = -1.0;
        A(2, 1) = 1.0;
        A(2, 2) = -1.0;
    } else {
        // third derivative continuous across x_1 and x_{n-2}
        A(0, 0) = h[1];
        A(0, 1) = -(h[0] + h[1]);
        A(0, 2) = h[0];
        A(n - 1, n - 3) = h[n - 2];
        A(n - 1, n - 2) = -(h[n - 3] + h[n - 2]);
        A(n - 1, n - 1) = h[n - 3];
    }
    Eigen::VectorXd m = A.partialPivLu().solve(rhs);
    for (int i = 0; i < n; ++i) m_[i] = m(i);
}

double CubicSpline::operator()(double t) const {
    const int n = static_cast<int>(x_.size());
    int i = static_cast<int>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    i = std::clamp(i, 0, n - 2);
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - t) / h, B = (t - x_[i]) / h;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

}  // namespace qmm::detail
