#include "qmm/coeff_file.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace qmm {

using nlohmann::json;

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

namespace {

double parse_real(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw ValidationError(where + ": expected a decimal string");
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ValidationError(where + ": bad number '" + s + "'");
    return v;
}

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ValidationError(where + ": unknown field '" + k + "'");
}

const json& need(const json& j, const std::string& key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(where + ": missing field '" + key + "'");
    return *it;
}

json spec_json(const SolveSpec& s) {
    json j;
    j["target"] = s.target.coeffs();
    j["measure"] = s.measure == ErrorMeasure::absolute ? "abs" : "rel";
    j["variant"] = s.variant.name();
    j["N"] = s.N;
    j["weights"] = s.weights;
    j["x_end"] = s.x_end ? json(*s.x_end) : json(nullptr);
    j["fixed_min_b"] = s.fixed_min_b ? json(*s.fixed_min_b) : json(nullptr);
    return j;
}

SolveSpec spec_from(const json& j) {
    only_keys(j, {"target", "measure", "variant", "N", "weights", "x_end", "fixed_min_b"}, "spec");
    try {
        SolveSpec s;
        s.target = TargetPoly(need(j, "target", "spec").get<std::vector<double>>());
        const std::string m = need(j, "measure", "spec").get<std::string>();
        if (m != "abs" && m != "rel") throw ValidationError("spec.measure must be abs or rel");
        s.measure = m == "abs" ? ErrorMeasure::absolute : ErrorMeasure::relative;
        s.variant = Variant::parse(need(j, "variant", "spec").get<std::string>());
        s.N = need(j, "N", "spec").get<int>();
        s.weights = need(j, "weights", "spec").get<std::vector<double>>();
        const json& xe = need(j, "x_end", "spec");
        if (!xe.is_null()) s.x_end = xe.get<double>();
        const json& fb = need(j, "fixed_min_b", "spec");
        if (!fb.is_null()) s.fixed_min_b = fb.get<double>();
        s.validate();
        return s;
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(std::string("spec: ") + e.what());
    }
}

std::string line_context(const std::string& text, std::size_t byte) {
    std::size_t line = 1, start = 0;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') {
            ++line;
            start = i + 1;
        }
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::ostringstream os;
    os << "line " << line << ", column " << (byte >= start ? byte - start : 0) << ": "
       << text.substr(start, end - start);
    return os.str();
}

}  // namespace

std::string spec_to_string(const SolveSpec& s) { return spec_json(s).dump(); }

std::string to_json(const CoefficientFile& f) {
    const MinimaxSolution& sol = f.solution;
    json j;
    j["schema_version"] = f.schema_version;
    j["generator"] = f.generator;
    if (f.generator == "minimax") {
        j["spec"] = spec_json(sol.spec);
    } else {
        j["spec"] = {{"target", sol.spec.target.coeffs()},
                     {"measure", sol.spec.measure == ErrorMeasure::absolute ? "abs" : "rel"}};
    }
    json co = json::array();
    for (const Term& t : sol.expsum.terms()) co.push_back({{"a", format_real(t.a)}, {"b", format_real(t.b)}});
    j["coefficients"] = co;
    json ex = json::array();
    for (double x : sol.extrema) ex.push_back(format_real(x));
    j["achieved"] = {{"e_max", format_real(sol.e_max)}, {"extrema", ex}};
    const double rn = sol.diagnostics.residual_norm;
    j["diagnostics"] = {{"iterations", sol.diagnostics.iterations},
                        {"residual_norm", std::isfinite(rn) ? json(format_real(rn)) : json(nullptr)},
                        {"source", sol.diagnostics.guess_source}};
    if (f.provenance)
        j["provenance"] = {{"tool_version", f.provenance->tool_version}, {"timestamp", f.provenance->timestamp}};
    return j.dump(2) + "\n";
}

CoefficientFile from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("malformed coefficient file at " + line_context(text, e.byte ? e.byte - 1 : 0) + " (" +
                         e.what() + ")");
    }
    only_keys(j, {"schema_version", "generator", "spec", "coefficients", "achieved", "diagnostics", "provenance"},
              "file");
    CoefficientFile f;
    try {
        f.schema_version = need(j, "schema_version", "file").get<int>();
        if (f.schema_version != kSchemaVersion)
            throw ValidationError("unsupported schema_version " + std::to_string(f.schema_version));
        if (j.contains("generator")) f.generator = j["generator"].get<std::string>();
        if (f.generator.empty()) throw ValidationError("generator must not be empty");
        MinimaxSolution& sol = f.solution;
        if (f.generator == "minimax") {
            sol.spec = spec_from(need(j, "spec", "file"));
        } else {
            // baseline sets: only the target and the measure are meaningful
            const json& sj = need(j, "spec", "file");
            only_keys(sj, {"target", "measure"}, "spec");
            sol.spec.target = TargetPoly(need(sj, "target", "spec").get<std::vector<double>>());
            const std::string m = need(sj, "measure", "spec").get<std::string>();
            if (m != "abs" && m != "rel") throw ValidationError("spec.measure must be abs or rel");
            sol.spec.measure = m == "abs" ? ErrorMeasure::absolute : ErrorMeasure::relative;
        }

        const json& co = need(j, "coefficients", "file");
        if (!co.is_array() || co.empty()) throw ValidationError("coefficients: expected a non-empty array");
        std::vector<Term> terms;
        for (std::size_t i = 0; i < co.size(); ++i) {
            const std::string w = "coefficients[" + std::to_string(i) + "]";
            only_keys(co[i], {"a", "b"}, w);
            const double a = parse_real(need(co[i], "a", w), w + ".a");
            const double b = parse_real(need(co[i], "b", w), w + ".b");
            if (!(a > 0.0)) throw ValidationError(w + ": a must be positive");
            if (!(b > 0.0)) throw ValidationError(w + ": b must be positive");
            terms.push_back({a, b});
        }
        sol.expsum = ExpSum(std::move(terms));
        if (f.generator == "minimax" && static_cast<int>(sol.expsum.size()) != sol.spec.N)
            throw ValidationError("coefficients: expected N = " + std::to_string(sol.spec.N) + " terms");
        if (f.generator != "minimax") sol.spec.N = static_cast<int>(sol.expsum.size());

        const json& ach = need(j, "achieved", "file");
        only_keys(ach, {"e_max", "extrema"}, "achieved");
        sol.e_max = parse_real(need(ach, "e_max", "achieved"), "achieved.e_max");
        if (!(sol.e_max > 0.0)) throw ValidationError("achieved.e_max must be positive");
        const json& ex = need(ach, "extrema", "achieved");
        if (!ex.is_array()) throw ValidationError("achieved.extrema: expected an array");
        for (std::size_t i = 0; i < ex.size(); ++i) {
            const double x = parse_real(ex[i], "achieved.extrema");
            if (!(x > 0.0) || (!sol.extrema.empty() && !(x > sol.extrema.back())))
                throw ValidationError("achieved.extrema must be positive and increasing");
            sol.extrema.push_back(x);
        }

        if (j.contains("diagnostics")) {
            const json& d = j["diagnostics"];
            only_keys(d, {"iterations", "residual_norm", "source"}, "diagnostics");
            sol.diagnostics.iterations = d.value("iterations", 0);
            sol.diagnostics.residual_norm = std::nan("");
            if (d.contains("residual_norm") && !d["residual_norm"].is_null())
                sol.diagnostics.residual_norm = parse_real(d["residual_norm"], "diagnostics.residual_norm");
            sol.diagnostics.guess_source = d.value("source", "");
        }
        if (j.contains("provenance")) {
            const json& p = j["provenance"];
            only_keys(p, {"tool_version", "timestamp"}, "provenance");
            f.provenance = Provenance{p.value("tool_version", ""), p.value("timestamp", "")};
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(e.what());
    }
    return f;
}

void save(const std::string& path, const CoefficientFile& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << to_json(f);
    if (!os) throw std::runtime_error("write failed: " + path);
}

CoefficientFile load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json(ss.str());
}

Provenance make_provenance() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return {kToolVersion, buf};
}

}  // namespace qmm
