#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace qmm {

struct Term {
    double a;
    double b;
};

// Sum of a_n exp(-b_n x^2), all a, b > 0, stored with strictly increasing b.
class ExpSum {
public:
    ExpSum() = default;
    explicit ExpSum(std::vector<Term> terms);
    ExpSum(const std::vector<double>& a, const std::vector<double>& b);

    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }
    const std::vector<Term>& terms() const { return terms_; }
    const Term& operator[](std::size_t i) const { return terms_[i]; }
    std::vector<double> a() const;
    std::vector<double> b() const;
    double sum_a() const;
    double min_b() const { return terms_.front().b; }
    double max_b() const { return terms_.back().b; }

private:
    std::vector<Term> terms_;
};

// Omega(Q) = sum_p c_p Q^p.
class TargetPoly {
public:
    TargetPoly() : c_{0.0, 1.0} {}
    explicit TargetPoly(std::vector<double> c);
    static TargetPoly identity() { return TargetPoly(); }
    static TargetPoly power(int p);
    static TargetPoly qam4() { return TargetPoly({0.0, 2.0, -1.0}); }

    const std::vector<double>& coeffs() const { return c_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    // Lowest power with a nonzero coefficient; governs the large-x tail.
    int tail_power() const;
    bool is_identity() const;

    double omega(double qv) const;
    double omega_prime(double qv) const;
    double omega_second(double qv) const;
    // Omega(1/2), the target value at x = 0.
    double at_origin() const { return omega(0.5); }

    bool operator==(const TargetPoly&) const = default;

private:
    std::vector<double> c_;
};

enum class ErrorMeasure { absolute, relative };

enum class TailClass { diverges, converges_to_minus_one, converges_to_zero_abs };

double eval(const ExpSum& s, double x);
double eval_prime(const ExpSum& s, double x);
double eval_second(const ExpSum& s, double x);

double target_eval(const TargetPoly& t, double x);
double target_prime(const TargetPoly& t, double x);
double target_second(const TargetPoly& t, double x);

struct ErrorValue {
    double e;
    double de;
    double d2e;
};

// Below this target magnitude relative error is reported as a domain error.
inline constexpr double kTargetFloor = 1e-300;

double error(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double x);
double error_prime(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double x);
ErrorValue error_all(const ExpSum& s, const TargetPoly& t, ErrorMeasure m, double x);

TailClass tail_class(const ExpSum& s, const TargetPoly& t,
                     ErrorMeasure m = ErrorMeasure::relative);

// Expands prod_l s_l^{p_l} into one sum, merging b values equal within 1e-12.
ExpSum combine_powers(const std::vector<std::pair<ExpSum, int>>& factors);

}  // namespace qmm
