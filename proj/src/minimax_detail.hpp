#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qmm/minimax.hpp"

namespace qmm::detail {

// The equation system with every level made explicit, so homotopies can move
// levels, endpoint and the pinned b_1 away from the published variants.
struct System {
    TargetPoly target;
    ErrorMeasure measure = ErrorMeasure::absolute;
    int N = 1;
    int K = 0;
    std::optional<double> fixed_b1;
    std::vector<double> level;  // e(x_k) = level[k] * e_max
    double origin_level = 0.0;  // e(0) = origin_level * e_max
    double end_level = 0.0;     // relative only: e(x_end) = end_level * e_max
    double x_end = 0.0;
    int elim_row = -1;          // >= 0: e_max eliminated through this value row

    bool relative() const { return measure == ErrorMeasure::relative; }
    int num_ab() const { return N + N - (fixed_b1 ? 1 : 0); }
    int nu() const { return num_ab() + K + (elim_row >= 0 ? 0 : 1); }
    int neq() const { return 2 * K + 1 + (relative() ? 1 : 0) - (elim_row >= 0 ? 1 : 0); }
};

System make_system(const SolveSpec& spec, bool eliminate = false);

// Sign pattern times weights for the variant.
std::vector<double> value_levels(const SolveSpec& spec);

Params unpack(const System& sys, const Eigen::VectorXd& u);
Eigen::VectorXd pack(const System& sys, const Params& p);

// Residuals (original units), optional Jacobian in transformed unknowns and the
// line-search row scaling. Returns false on non-finite values.
bool evaluate(const System& sys, const Eigen::VectorXd& u, Eigen::VectorXd& f, Eigen::MatrixXd* J,
              Eigen::VectorXd* scale);

struct NewtonResult {
    Eigen::VectorXd u;
    int iterations = 0;
    double norm = 0.0;
};

NewtonResult newton(const System& sys, Eigen::VectorXd u, int max_iterations, double stop_tol);

// Scan-based sanity of a converged candidate: e_max > 0, extrema inside the
// range, measured max error equal to e_max and the right extrema count.
bool plausible(const SolveSpec& spec, const Params& p);

// Origin-adjusted sum of a for a given e_max.
double origin_sum(const SolveSpec& spec, double e);

struct Candidate {
    std::string source;
    Params p;
};

using CandidateGen = std::function<std::optional<Candidate>()>;

// Supplies uniform-weight solutions of sibling variants at the same N.
using Companion = std::function<std::optional<MinimaxSolution>(const Variant&, int N)>;

std::vector<CandidateGen> candidates(const SolveSpec& spec, const std::vector<MinimaxSolution>& prior,
                                     const Companion& companion);

// Carries a converged unknown vector of path(0) along path(t) to t = 1,
// bisecting failed steps. Every path(t) must share dimensions.
std::optional<Eigen::VectorXd> homotopy(const std::function<System(double)>& path, const std::vector<double>& ts,
                                        Eigen::VectorXd u);

// Solves one uniform-weight spec by trying candidates in order, then perturbed
// restarts.
std::optional<MinimaxSolution> solve_from_candidates(const SolveSpec& spec,
                                                     const std::vector<CandidateGen>& gens,
                                                     const SolveOptions& opt, double* best_norm);

MinimaxSolution finish(const SolveSpec& spec, const Params& p, const NewtonResult& nr,
                       const std::string& source);

// Relative-measure chains that fail at some x_end fall back to a solution at
// an endpoint closer to this one, carried over by a homotopy in x_end.
inline constexpr double kXendBase = 4.0;

// Uniform-weight solutions per variant for one (target, measure, x_end).
class Continuation {
public:
    Continuation(TargetPoly target, ErrorMeasure m, std::optional<double> x_end, SolveOptions opt)
        : target_(std::move(target)), measure_(m), x_end_(x_end), opt_(opt) {}

    std::optional<MinimaxSolution> get(const Variant& v, int N);
    const std::string& last_error() const { return last_error_; }

private:
    std::optional<Candidate> from_base(const SolveSpec& spec, const Variant& v, int n);

    TargetPoly target_;
    ErrorMeasure measure_;
    std::optional<double> x_end_;
    SolveOptions opt_;
    std::map<std::string, std::vector<std::optional<MinimaxSolution>>> cache_;
    std::string last_error_;
    std::unique_ptr<Continuation> base_;
};

}  // namespace qmm::detail
