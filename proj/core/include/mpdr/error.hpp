#pragma once

#include <stdexcept>
#include <string>

namespace mpdr {

/// Invalid configuration: bad dimensions, bad hyperparameters, missing keys.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A computation produced a non-finite value.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An API contract was violated by the caller (e.g. gradient of a non-scalar).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

/// Input is degenerate for the requested operation (e.g. zero-norm vector
/// passed to a sphere projection).
class DegenerateInputError : public std::runtime_error {
public:
    explicit DegenerateInputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file (CSV, config). Message carries the line number.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Corrupt or incompatible serialized artifact (checkpoint).
class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem problem: missing file, unwritable path.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Short machine-parsable code for an exception, used by the CLI diagnostics.
const char* error_code(const std::exception& e);

} // namespace mpdr
