#pragma once

#include <stdexcept>
#include <string>

namespace diar {

// Base class for all diarkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input document: missing/ill-typed fields, NaN/Inf payloads,
// unparseable lines. Messages carry the offending record index or line number.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

// Structurally valid input that violates a domain invariant
// (non-monotone times, dangling ids, out-of-range probabilities, ...).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Inconsistent run configuration (e.g. semantic mode without semantic scores).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace diar
