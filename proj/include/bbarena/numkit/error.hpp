#pragma once

#include <stdexcept>
#include <string>

namespace bbarena {

/// Raised when a caller breaks an operation's precondition (dimension
/// mismatch, invalid configuration, out-of-range argument).
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised by the query ledger once the budget has been consumed.
class BudgetExhausted : public std::runtime_error {
public:
    explicit BudgetExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// A finite-difference probe whose noiseless difference is (numerically) zero.
class DegenerateProbe : public std::runtime_error {
public:
    explicit DegenerateProbe(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractViolation(message);
}

}  // namespace bbarena
