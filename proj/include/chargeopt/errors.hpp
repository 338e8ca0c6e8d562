#ifndef CHARGEOPT_ERRORS_HPP
#define CHARGEOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace chargeopt {

// Input files: missing, unreadable, or syntactically broken.
class FileError : public std::runtime_error {
public:
    explicit FileError(const std::string& msg) : std::runtime_error(msg) {}
};

// Well-formed file whose content does not match the documented schema.
// Carries the dotted path of the offending field, e.g. "stations[2].disruption.std_dev".
class SchemaError : public std::runtime_error {
public:
    SchemaError(const std::string& field, const std::string& msg)
        : std::runtime_error("schema violation at '" + field + "': " + msg), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Instance invariant violations discovered by validation.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument to a numeric routine (nonpositive sigma, out-of-range alpha, ...).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Experiment / CLI configuration problems.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Exhaustive enumeration exceeded its node budget.
class EnumerationLimitError : public std::runtime_error {
public:
    explicit EnumerationLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

// The optimization model admits no feasible point; mapped to its own CLI
// exit code so scripts can tell it apart from bad input.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace chargeopt

#endif
