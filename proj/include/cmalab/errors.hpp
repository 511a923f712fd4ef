#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmalab {

// Bad user input: malformed grids, out-of-range parameters, config syntax.
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A potential lost strict positivity of u' or u'' where it was required.
class DegeneracyError : public std::runtime_error {
public:
    DegeneracyError(const std::string& what, std::size_t node)
        : std::runtime_error(what), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

// A modelling constraint failed (gamma above the degree, divergent normalization).
class ConstraintViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace cmalab
