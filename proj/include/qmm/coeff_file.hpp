#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "qmm/minimax.hpp"

namespace qmm {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct Provenance {
    std::string tool_version;
    std::string timestamp;
};

struct CoefficientFile {
    int schema_version = kSchemaVersion;
    // "minimax" or a baseline rule name; baseline files keep only the target and
    // measure of the spec, and N counts the terms
    std::string generator = "minimax";
    MinimaxSolution solution;
    std::optional<Provenance> provenance;
};

class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 17 significant digits, round-trips any double.
std::string format_real(double v);

std::string to_json(const CoefficientFile& f);
CoefficientFile from_json(const std::string& text);

void save(const std::string& path, const CoefficientFile& f);
CoefficientFile load(const std::string& path);

// Current UTC time, ISO 8601.
Provenance make_provenance();

std::string spec_to_string(const SolveSpec& s);

}  // namespace qmm
