#pragma once

#include "qmm/expsum.hpp"

namespace qmm {

// Nakagami-m channel; the SNR is gamma distributed with shape m, mean mean_snr.
struct NakagamiChannel {
    double m = 1.0;
    double mean_snr = 1.0;  // linear
    void validate() const;
};

// 2 Q(sqrt(snr)) - Q(sqrt(snr))^2
double sep_4qam_conditional(double snr);

// Average of sum a_n exp(-b_n alpha^2 snr) over the gamma density:
// (m/g)^m sum a_n (b_n alpha^2 + m/g)^(-m).
double sep_average_closed(const ExpSum& s, const NakagamiChannel& ch, double alpha = 1.0);

// (1 - s g/m)^(-m), valid for s < m/g.
double mgf_gamma(const NakagamiChannel& ch, double s);

// Numerical average of target(Q(alpha sqrt(snr))); adaptive Gauss-Legendre in
// x = sqrt(snr), absolute tolerance 1e-10.
double sep_average_exact(const NakagamiChannel& ch, const TargetPoly& target = TargetPoly::qam4(),
                         double alpha = 1.0);

}  // namespace qmm
