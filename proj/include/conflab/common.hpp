#pragma once

// Shared ground types: error hierarchy and the check-report record that every
// verification routine returns.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace conflab {

/// Input outside an operation's mathematical domain (bad degree, non-finite
/// entries, non-positive field values, singular evaluation points, ...).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// A stated jet precondition was violated beyond tolerance.
class PreconditionError : public DomainError {
public:
    explicit PreconditionError(const std::string& what) : DomainError(what) {}
};

/// A search or certification could not resolve its target on the given grid.
class ResolutionError : public std::runtime_error {
public:
    explicit ResolutionError(const std::string& what) : std::runtime_error(what) {}
};

/// Root search exhausted its admissible range; carries the achieved supremum.
class NoRootError : public DomainError {
public:
    NoRootError(const std::string& what, double achieved_supremum)
        : DomainError(what), supremum(achieved_supremum) {}
    double supremum;
};

/// Expression text could not be parsed; `position` is a byte offset.
class ParseError : public DomainError {
public:
    ParseError(const std::string& what, std::size_t position)
        : DomainError(what + " at position " + std::to_string(position)), position(position) {}
    std::size_t position;
};

/// Outcome of one named verification: computed values, the references they
/// were held against, the worst absolute error, and the tolerance applied.
/// `informational` checks report values without gating overall success.
struct CheckReport {
    std::string name;
    std::vector<double> values;
    std::vector<double> references;
    double abs_err = 0.0;
    double tol = 0.0;
    bool pass = false;
    bool informational = false;
    std::string note;
};

}  // namespace conflab
