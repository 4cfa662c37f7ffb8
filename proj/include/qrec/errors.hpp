#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qrec {

// Bad input: malformed parameters, inadmissible words, invalid configs.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A point sits on a partition boundary where the operation needs an interior point.
class BoundaryError : public std::runtime_error {
public:
    BoundaryError(const std::string& what, std::size_t index)
        : std::runtime_error(what), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

// Numerical failures: non-primitive matrices, exhausted resampling, failed root finds.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Config validation failure carrying every violation found.
class ValidationError : public InvalidArgument {
public:
    explicit ValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

}  // namespace qrec
