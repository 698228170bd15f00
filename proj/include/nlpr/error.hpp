#ifndef NLPR_ERROR_HPP
#define NLPR_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlpr {

/// Operand dimensions disagree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input lies outside the domain of an operation (empty input, non-finite value, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed file content. Carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A randomized construction ran out of its attempt budget.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlpr

#endif  // NLPR_ERROR_HPP
