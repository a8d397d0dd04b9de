#pragma once

#include <stdexcept>
#include <string>

namespace semcrra {

// Argument outside the domain of a formula (non-finite input, o outside its
// interval, empty sample set, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Budgets admit no allocation: U * b_min > b_max or U * p_min > p_max.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The linearization point handed to the convex subproblem does not satisfy
// the linearized constraint set, so no strictly interior start exists.
class AnchorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fewer distinct abscissae than free curve parameters.
class UnderdeterminedFitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exhaustive oracle asked to search a space it cannot enumerate.
class OracleScaleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed scenario or sample file; the message carries the line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Scenario field violates its invariant.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace semcrra
