#pragma once

#include <stdexcept>
#include <string>

namespace apxsig {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (library files, designs, experiments).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    /// 1-based line number of the offending input, 0 when not line oriented.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnsupportedFormatError : public Error {
public:
    using Error::Error;
};

/// A metric that has no meaning for the given inputs (e.g. PSNR of a constant reference).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// No design, including the exact one, meets the quality constraint.
class InfeasibleConstraintError : public Error {
public:
    InfeasibleConstraintError(const std::string& stage, const std::string& detail)
        : Error("infeasible constraint at stage " + stage + ": " + detail), stage_(stage) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace apxsig
