#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmm/expsum.hpp"

namespace qmm {

enum class Kind { approximation, lower_bound, upper_bound };
enum class Origin { zero_at_origin, weighted_at_origin };

// Lower bounds start from e(0) = -w0 e_max, upper bounds from e(0) = 0;
// approximations may use either.
class Variant {
public:
    Variant(Kind kind, Origin origin);
    static Variant approx0() { return {Kind::approximation, Origin::zero_at_origin}; }
    static Variant approxw() { return {Kind::approximation, Origin::weighted_at_origin}; }
    static Variant lower() { return {Kind::lower_bound, Origin::weighted_at_origin}; }
    static Variant upper() { return {Kind::upper_bound, Origin::zero_at_origin}; }
    // "approx0" | "approxw" | "lower" | "upper"
    static Variant parse(const std::string& name);
    std::string name() const;

    Kind kind() const { return kind_; }
    Origin origin() const { return origin_; }
    bool operator==(const Variant&) const = default;

private:
    Kind kind_;
    Origin origin_;
};

// Number of interior extrema (x_1..x_K).
int extrema_count(ErrorMeasure m, Kind k, int N);

inline constexpr int kMaxTerms = 25;

struct SolveSpec {
    TargetPoly target;
    ErrorMeasure measure = ErrorMeasure::absolute;
    Variant variant = Variant::approxw();
    int N = 1;
    // w_0 (origin), w_1..w_K, and w_{K+1} (endpoint) for relative measure.
    std::vector<double> weights;
    std::optional<double> x_end;
    std::optional<double> fixed_min_b;

    // Fills uniform weights and the upper-bound min-b, then validates.
    static SolveSpec make(TargetPoly target, ErrorMeasure m, Variant v, int N,
                          std::optional<double> x_end = std::nullopt,
                          std::vector<double> weights = {});

    int K() const { return extrema_count(measure, variant.kind(), N); }
    int num_weights() const { return K() + 1 + (measure == ErrorMeasure::relative ? 1 : 0); }
    bool uniform() const;
    void validate() const;

    // Solver unknowns; the min-b constraint is eliminated, not stored.
    int num_unknowns() const;
    // Equation count with the min-b constraint counted as an equation.
    int equation_count() const { return num_unknowns() + (fixed_min_b ? 1 : 0); }
};

struct Diagnostics {
    int iterations = 0;
    double residual_norm = 0.0;
    std::string guess_source;
};

struct MinimaxSolution {
    ExpSum expsum;
    double e_max = 0.0;
    std::vector<double> extrema;
    SolveSpec spec;
    Diagnostics diagnostics;
};

// Original-coordinate view of the unknowns.
struct Params {
    std::vector<double> a, b, x;
    double e = 0.0;
};

// Transformed unknowns: a = exp(alpha); b_1 = exp(beta_1) unless fixed;
// b_n = b_{n-1}(1 + exp(beta_n)); x_1 = exp(xi_1), x_k = x_{k-1} + exp(xi_k);
// e_max = exp(eps).
Eigen::VectorXd pack(const SolveSpec& spec, const Params& p);
Params unpack(const SolveSpec& spec, const Eigen::VectorXd& u);

// Rows: e'(x_k); e(x_k) - s_k w_k e_max; origin condition written as
// target(0)-adjusted value minus sum a; relative endpoint condition.
Eigen::VectorXd residuals(const SolveSpec& spec, const Eigen::VectorXd& u);
Eigen::MatrixXd jacobian(const SolveSpec& spec, const Eigen::VectorXd& u);

struct SolveOptions {
    int max_iterations = 200;
    int restarts = 5;
    double tolerance = 1e-12;
    // Remove e_max from the unknowns using the first nonzero value row.
    bool eliminate_emax = false;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double best_residual)
        : std::runtime_error(what), best_residual_(best_residual) {}
    double best_residual() const { return best_residual_; }

private:
    double best_residual_;
};

// Without a guess, runs continuation from N = 1 (and the companion
// approximation families needed by bound homotopies).
MinimaxSolution solve(const SolveSpec& spec, const std::optional<Eigen::VectorXd>& guess = std::nullopt,
                      const SolveOptions& opt = {});

// Continuation guess for spec from solutions at smaller N: the first candidate
// Newton carries to a plausible root, else the first usable one.
Eigen::VectorXd initial_guess(const SolveSpec& spec, const std::vector<MinimaxSolution>& prior);

struct SweepEntry {
    SolveSpec spec;
    std::optional<MinimaxSolution> solution;
    std::string error;
};

// Specs must share target, measure, variant and x_end, ascending in N.
std::vector<SweepEntry> sweep(const std::vector<SolveSpec>& specs, const SolveOptions& opt = {});

}  // namespace qmm
