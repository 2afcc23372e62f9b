#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ratiorules {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied a value outside an operation's domain.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input text violates a file format. Carries the 1-based line, 0 if unknown.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class VocabularyMismatch : public Error {
public:
    using Error::Error;
};

/// A ratio estimator was asked for C(x,y)/C(y) with C(y) = 0.
class UndefinedRatio : public Error {
public:
    using Error::Error;
};

class ZeroVariance : public Error {
public:
    using Error::Error;
};

class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, double gradient_norm)
        : Error(what), gradient_norm_(gradient_norm) {}

    double gradient_norm() const noexcept { return gradient_norm_; }

private:
    double gradient_norm_;
};

}  // namespace ratiorules
