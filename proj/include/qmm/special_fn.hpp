#pragma once

namespace qmm {

// Gaussian tail probability Q(x) for x >= 0. Relative error below 1e-14 while
// the result is a normal double (x <= ~37.5); flushes to subnormal/zero beyond.
double q(double x);

// dQ/dx = -exp(-x^2/2)/sqrt(2 pi). Defined for any finite x.
double q_prime(double x);

// Craig's integral (1/pi) int_0^{pi/2} exp(-x^2/(2 sin^2 t)) dt by Gauss-Legendre,
// nodes per panel on panels halving toward t = 0.
double q_craig_oracle(double x, int nodes);

}  // namespace qmm
