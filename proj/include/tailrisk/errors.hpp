#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tailrisk {

// Bad user input (non-positive prices, malformed rows, ...).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Series shorter than an operation requires.
class InsufficientDataError : public InputError {
public:
    explicit InsufficientDataError(const std::string& msg) : InputError(msg) {}
};

// Degenerate sample (zero variance etc.).
class DegenerateSeriesError : public InputError {
public:
    explicit DegenerateSeriesError(const std::string& msg) : InputError(msg) {}
};

// Parameter outside its mathematical domain.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimizer or root finder failed; carries the best point seen so far.
class FittingError : public std::runtime_error {
public:
    FittingError(const std::string& msg, std::vector<double> best_so_far = {})
        : std::runtime_error(msg), best_so_far(std::move(best_so_far)) {}
    std::vector<double> best_so_far;
};

// Numerical inversion failed; carries the final bracket.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& msg, double lo, double hi)
        : std::runtime_error(msg), bracket_lo(lo), bracket_hi(hi) {}
    double bracket_lo;
    double bracket_hi;
};

// Broken internal invariant (should never fire on valid parameters).
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace tailrisk
