#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "qmm/baselines.hpp"
#include "qmm/coeff_file.hpp"
#include "qmm/erranalysis.hpp"
#include "qmm/fading.hpp"
#include "qmm/minimax.hpp"

namespace fs = std::filesystem;
using namespace qmm;

namespace {

enum Exit { ok = 0, failure = 1, validation = 2, solver = 3, certification = 4 };

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

double to_real(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (s.empty() || pos != s.size() || !std::isfinite(v)) throw UsageError(what + ": bad number '" + s + "'");
    return v;
}

std::vector<double> split_reals(const std::string& s, char sep, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(to_real(item, what));
    if (!s.empty() && s.back() == sep) throw UsageError(what + ": trailing '" + std::string(1, sep) + "'");
    return out;
}

TargetPoly parse_target(const std::string& s) {
    if (s == "q") return TargetPoly::identity();
    if (s == "qam4") return TargetPoly::qam4();
    if (s.rfind("power:", 0) == 0) {
        const double p = to_real(s.substr(6), "--target power");
        if (p != std::floor(p) || p < 1 || p > 64) throw UsageError("--target power:p needs an integer p in [1, 64]");
        return TargetPoly::power(static_cast<int>(p));
    }
    if (s.rfind("poly:", 0) == 0) {
        auto c = split_reals(s.substr(5), ',', "--target poly");
        if (c.empty()) throw UsageError("--target poly needs coefficients");
        return TargetPoly(c);
    }
    throw UsageError("--target must be q, power:p or poly:c0,c1,...");
}

ErrorMeasure parse_measure(const std::string& s) {
    if (s == "abs") return ErrorMeasure::absolute;
    if (s == "rel") return ErrorMeasure::relative;
    throw UsageError("--error must be abs or rel");
}

std::pair<double, double> parse_range(const std::string& s) {
    auto v = split_reals(s, ':', "--range");
    if (v.size() != 2 || !(v[0] >= 0.0) || !(v[1] >= v[0])) throw UsageError("--range needs lo:hi with 0 <= lo <= hi");
    return {v[0], v[1]};
}

std::vector<double> parse_snr(const std::string& s) {
    auto v = split_reals(s, ':', "--snr-db");
    if (v.size() != 3 || !(v[2] > 0.0) || !(v[1] >= v[0])) throw UsageError("--snr-db needs lo:hi:step with step > 0");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((v[1] - v[0]) / v[2] + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(v[0] + i * v[2]);
    return out;
}

struct SpecFlags {
    std::string target = "q", error = "abs", variant = "approxw", weights;
    int n = 0;
    std::string xend;

    void add(CLI::App* c, bool with_weights) {
        c->add_option("--target", target, "q | power:p | poly:c0,c1,... | qam4")->capture_default_str();
        c->add_option("--error", error, "abs | rel")->capture_default_str();
        c->add_option("--variant", variant, "approx0 | approxw | lower | upper")->capture_default_str();
        c->add_option("--xend", xend, "right end of the relative-error interval");
        if (with_weights) c->add_option("--weights", weights, "w0,w1,... (default all ones)");
    }

    SolveSpec spec(int N, std::optional<double> xe) const {
        std::vector<double> w;
        if (!weights.empty()) w = split_reals(weights, ',', "--weights");
        return SolveSpec::make(parse_target(target), parse_measure(error), Variant::parse(variant), N, xe, w);
    }

    std::optional<double> x_end() const {
        if (xend.empty()) return std::nullopt;
        return to_real(xend, "--xend");
    }
};

CoefficientFile wrap(const MinimaxSolution& sol, bool provenance, const std::string& generator = "minimax") {
    CoefficientFile f;
    f.generator = generator;
    f.solution = sol;
    if (provenance) f.provenance = make_provenance();
    return f;
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    os << text;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run_solve(const SpecFlags& sf, const std::string& out, bool prov) {
    const SolveSpec spec = sf.spec(sf.n, sf.x_end());
    const MinimaxSolution sol = solve(spec);
    emit(out, to_json(wrap(sol, prov)));
    std::fprintf(stderr, "%s N=%d e_max=%.10e iterations=%d residual=%.3e source=%s\n", spec.variant.name().c_str(),
                 spec.N, sol.e_max, sol.diagnostics.iterations, sol.diagnostics.residual_norm,
                 sol.diagnostics.guess_source.c_str());
    return ok;
}

std::string sweep_name(const SolveSpec& s) {
    std::ostringstream os;
    os << s.variant.name() << '_' << (s.measure == ErrorMeasure::absolute ? "abs" : "rel");
    if (s.x_end) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "_x%g", *s.x_end);
        os << buf;
    }
    os << "_n" << s.N << ".json";
    return os.str();
}

int run_sweep(const SpecFlags& sf, const std::string& out, bool prov, bool full_grid) {
    if (out.empty()) throw UsageError("sweep needs --out DIR");
    if (!sf.weights.empty()) throw UsageError("sweep solves uniform weights only");
    if (sf.n < 1 || sf.n > kMaxTerms) throw UsageError("--n must be in [1, 25]");
    std::vector<std::optional<double>> ends;
    if (full_grid) {
        if (parse_measure(sf.error) != ErrorMeasure::relative) throw UsageError("--full-grid needs --error rel");
        if (!sf.xend.empty()) throw UsageError("--full-grid sets x_end itself");
        for (int k = 10; k <= 100; ++k) ends.push_back(k / 10.0);
    } else {
        ends.push_back(sf.x_end());
    }
    std::vector<std::vector<SolveSpec>> jobs;
    for (const auto& xe : ends) {
        std::vector<SolveSpec> specs;
        for (int n = 1; n <= sf.n; ++n) specs.push_back(sf.spec(n, xe));
        jobs.push_back(std::move(specs));
    }
    fs::create_directories(out);

    // independent x_end branches run in parallel; output order stays fixed
    std::vector<std::vector<SweepEntry>> results(jobs.size());
    std::atomic<std::size_t> next{0};
    const unsigned nt = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), jobs.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < nt; ++t)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next++) < jobs.size();) results[i] = sweep(jobs[i]);
            });
    }

    int failed = 0;
    std::printf("x_end\tN\te_max\titerations\tsource\tstatus\n");
    for (const auto& rs : results)
        for (const SweepEntry& r : rs) {
            const std::string xe = r.spec.x_end ? g17(*r.spec.x_end) : "-";
            if (r.solution) {
                save((fs::path(out) / sweep_name(r.spec)).string(), wrap(*r.solution, prov));
                std::printf("%s\t%d\t%.10e\t%d\t%s\tok\n", xe.c_str(), r.spec.N, r.solution->e_max,
                            r.solution->diagnostics.iterations, r.solution->diagnostics.guess_source.c_str());
            } else {
                ++failed;
                std::printf("%s\t%d\t-\t-\t-\tfailed: %s\n", xe.c_str(), r.spec.N, r.error.c_str());
            }
        }
    return failed ? solver : ok;
}

CoefficientFile load_minimax(const std::string& path) {
    CoefficientFile f = load(path);
    if (f.generator != "minimax") throw ValidationError(path + ": generated by '" + f.generator + "', not a minimax solve");
    return f;
}

int run_certify(const std::string& coeffs) {
    const CoefficientFile f = load_minimax(coeffs);
    const CertReport rep = certify(f.solution);
    std::cout << rep.to_string();
    return rep.passed() ? ok : certification;
}

ExpSum baseline_set(const std::string& rule, int N) {
    QuadratureRule r = QuadratureRule::parse(rule, N);
    r.validate();
    return quadrature_coeffs(r);
}

int run_scan(const std::string& coeffs, const std::string& rule, int n, const std::string& range, int points,
             const std::string& out) {
    ExpSum s;
    TargetPoly target;
    std::optional<double> x_end;
    if (!coeffs.empty()) {
        if (!rule.empty()) throw UsageError("scan takes --coeffs or --rule, not both");
        const CoefficientFile f = load(coeffs);
        s = f.solution.expsum;
        target = f.solution.spec.target;
        x_end = f.solution.spec.x_end;
    } else if (!rule.empty()) {
        s = baseline_set(rule, n);
    } else {
        throw UsageError("scan needs --coeffs FILE or --rule RULE --n N");
    }
    if (points < 1) throw UsageError("--points must be >= 1");
    auto [lo, hi] = range.empty() ? std::pair<double, double>{0.0, x_end.value_or(15.0)} : parse_range(range);
    const ErrorProfile p = error_profile(s, target, ErrorMeasure::absolute, lo, hi, points);
    std::ostringstream os;
    os << "x\ttarget\tapprox\td\tr\n";
    for (const ProfileRow& r : p.grid)
        os << g17(r.x) << '\t' << g17(r.target) << '\t' << g17(r.approx) << '\t' << g17(r.d) << '\t' << g17(r.r)
           << '\n';
    emit(out, os.str());
    std::fprintf(stderr, "d_max=%.6e r_max=%.6e (relative scan up to x=%g)\n", p.measured_d_max, p.measured_r_max,
                 p.r_cap);
    return ok;
}

int run_baseline(const std::string& rule, int n, const std::string& out, bool prov) {
    if (rule.empty() || n < 1) throw UsageError("baseline needs --rule and --n");
    const ExpSum s = baseline_set(rule, n);
    const TargetPoly t = TargetPoly::identity();
    const MaxError me = max_error_at(s, t, ErrorMeasure::absolute, 0.0, 15.0);
    std::printf("rule\tN\td_max\targmax\n%s\t%d\t%.6e\t%.6g\n", QuadratureRule::parse(rule, n).name().c_str(), n,
                me.value, me.x);
    if (!out.empty()) {
        MinimaxSolution sol;
        sol.expsum = s;
        sol.e_max = me.value;
        sol.spec.target = t;
        sol.spec.N = n;
        for (const Extremum& z : find_extrema(s, t, ErrorMeasure::absolute, 0.0, 15.0)) sol.extrema.push_back(z.x);
        sol.diagnostics = {0, std::nan(""), "quadrature"};
        save(out, wrap(sol, prov, QuadratureRule::parse(rule, n).name()));
    }
    return ok;
}

int run_sep(const std::string& coeffs, double m, const std::string& snr) {
    if (coeffs.empty()) throw UsageError("sep needs --coeffs FILE");
    const CoefficientFile f = load(coeffs);
    const auto grid = parse_snr(snr);
    std::printf("snr_db\texact\tapprox\n");
    for (double db : grid) {
        const NakagamiChannel ch{m, std::pow(10.0, db / 10.0)};
        std::printf("%g\t%.10f\t%.10f\n", db, sep_average_exact(ch, f.solution.spec.target),
                    sep_average_closed(f.solution.expsum, ch));
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimax exponential-sum approximations and bounds of the Gaussian Q-function"};
    app.require_subcommand(1);

    SpecFlags sf;
    std::string out, coeffs, range, rule, snr = "-5:20:5";
    int points = 1001;
    double m = 1.0;
    bool no_prov = false, full_grid = false;

    auto* solve_cmd = app.add_subcommand("solve", "solve one minimax system and write a coefficient file");
    sf.add(solve_cmd, true);
    solve_cmd->add_option("--n", sf.n, "number of terms")->required();
    solve_cmd->add_option("--out", out, "output file (default stdout)");
    solve_cmd->add_flag("--no-provenance", no_prov, "omit tool version and timestamp");

    auto* sweep_cmd = app.add_subcommand("sweep", "solve N = 1..n by continuation, one file per N");
    sf.add(sweep_cmd, true);
    sweep_cmd->add_option("--n", sf.n, "largest number of terms")->required();
    sweep_cmd->add_option("--out", out, "output directory")->required();
    sweep_cmd->add_flag("--no-provenance", no_prov, "omit tool version and timestamp");
    sweep_cmd->add_flag("--full-grid", full_grid, "relative only: every x_end in 1:0.1:10 (long running)");

    auto* cert_cmd = app.add_subcommand("certify", "check a coefficient file and print the report");
    cert_cmd->add_option("--coeffs", coeffs, "coefficient file")->check(CLI::ExistingFile)->required();

    auto* scan_cmd = app.add_subcommand("scan", "tab-separated error curve x, target, approx, d, r");
    scan_cmd->add_option("--coeffs", coeffs, "coefficient file")->check(CLI::ExistingFile);
    scan_cmd->add_option("--rule", rule, "baseline rule instead of a file");
    scan_cmd->add_option("--n", sf.n, "terms for --rule");
    scan_cmd->add_option("--range", range, "lo:hi (default 0:15, or 0:x_end)");
    scan_cmd->add_option("--points", points, "rows")->capture_default_str();
    scan_cmd->add_option("--out", out, "output file (default stdout)");

    auto* base_cmd = app.add_subcommand("baseline", "quadrature baseline of Craig's integral and its d_max on [0, 15]");
    base_cmd->add_option("--rule", rule, "legendre | clegendre:h | rect | trap")->required();
    base_cmd->add_option("--n", sf.n, "number of terms")->required();
    base_cmd->add_option("--out", out, "also write a coefficient file");
    base_cmd->add_flag("--no-provenance", no_prov, "omit tool version and timestamp");

    auto* sep_cmd = app.add_subcommand("sep", "average 4-QAM SEP over Nakagami-m fading, exact and closed form");
    sep_cmd->add_option("--coeffs", coeffs, "coefficient file")->check(CLI::ExistingFile)->required();
    sep_cmd->add_option("--m", m, "Nakagami m >= 0.5")->required();
    sep_cmd->add_option("--snr-db", snr, "lo:hi:step in dB")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : validation;
    }

    try {
        if (*solve_cmd) return run_solve(sf, out, !no_prov);
        if (*sweep_cmd) return run_sweep(sf, out, !no_prov, full_grid);
        if (*cert_cmd) return run_certify(coeffs);
        if (*scan_cmd) return run_scan(coeffs, rule, sf.n, range, points, out);
        if (*base_cmd) return run_baseline(rule, sf.n, out, !no_prov);
        if (*sep_cmd) return run_sep(coeffs, m, snr);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return validation;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return solver;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
    return ok;
}
