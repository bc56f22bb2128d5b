#ifndef ARRKIT_ERRORS_HPP
#define ARRKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace arrkit {

// ============================================================================
// Error hierarchy
// ============================================================================
//
// ValidationError      -> bad parameters / configuration (CLI exit 2)
// SchemaError          -> unknown variable, shape mismatch, name collision
// InsufficientDataError-> too few rows/samples for the requested operation
// DegenerateDataError  -> zero-variance target, single-class labels, ...
// BudgetExceededError  -> exhaustive search ran past its fitted-subset budget

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& msg) : Error(msg) {}
};

struct DegenerateDataError : Error {
    explicit DegenerateDataError(const std::string& msg) : Error(msg) {}
};

struct BudgetExceededError : Error {
    explicit BudgetExceededError(const std::string& msg) : Error(msg) {}
};

}  // namespace arrkit

#endif  // ARRKIT_ERRORS_HPP
