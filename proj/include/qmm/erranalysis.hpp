#pragma once

#include <string>
#include <vector>

#include "qmm/expsum.hpp"
#include "qmm/minimax.hpp"

namespace qmm {

struct Extremum {
    double x;
    double e;
};

// Largest x at which |target| stays above kTargetFloor.
double target_floor_x(const TargetPoly& t);

// Hybrid scan grid on [lo, hi]: linear on [0, 1], logarithmic above, plus a
// logarithmic band down to ~1e-2/sqrt(max_b) so the narrowest ripples are seen.
std::vector<double> scan_grid(double lo, double hi, double max_b, int points = 10000);

// Interior roots of e' bracketed on the scan grid and refined by bisection.
std::vector<Extremum> find_extrema(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double lo,
                                   double hi);

struct MaxError {
    double value;
    double x;
};

MaxError max_error_at(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double lo, double hi);
double max_error(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double lo, double hi);

struct ProfileRow {
    double x, target, approx, d, r;
};

struct ErrorProfile {
    std::vector<ProfileRow> grid;
    std::vector<Extremum> extrema;  // of the measure requested
    double measured_d_max = 0.0;
    double measured_r_max = 0.0;    // over the part of the range above the target floor
    double r_cap = 0.0;             // x where relative scanning stopped
};

// Evenly spaced rows on [lo, hi] for plotting; maxima come from the dense scan.
ErrorProfile error_profile(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double lo, double hi,
                           int points);

// Scan range used to judge a solution: [0, x_end] for relative measure,
// [0, max(15, 2 x_K)] for absolute.
double scan_hi(const SolveSpec& spec, const std::vector<double>& extrema);

struct CertCheck {
    std::string name;
    bool passed;
    double margin;  // measured deviation (<= threshold when passed)
    std::string detail;
};

struct CertReport {
    std::vector<CertCheck> checks;
    bool passed() const;
    std::string to_string() const;
};

// Checks extrema count, weighted equal ripple, sign pattern, one-sidedness
// for bounds and the measured maximum against sol.e_max.
CertReport certify(const MinimaxSolution& sol);

// Builds a solution record for an arbitrary coefficient set: extrema and
// e_max come from the scan.
MinimaxSolution describe(const ExpSum& s, const SolveSpec& spec);

}  // namespace qmm
