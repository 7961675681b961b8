#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecotherm {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed money-function text. position is a 0-based byte offset.
class ParseError : public Error {
public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

// Evaluation failure of a well-formed expression (ln of non-positive value,
// unbound constant, wrong point dimension).
class EvalError : public Error {
public:
  using Error::Error;
};

// A model or family validity condition does not hold at the requested point.
// condition() names it, e.g. "alpha = c1/T - 1 > 0".
class ValidityError : public Error {
public:
  ValidityError(std::string condition, const std::string& detail)
      : Error("validity condition violated: " + condition + " (" + detail + ")"),
        condition_(std::move(condition)) {}

  const std::string& condition() const noexcept { return condition_; }

private:
  std::string condition_;
};

// The requested integral does not exist.
class DivergenceError : public Error {
public:
  using Error::Error;
};

// Quadrature gave up before reaching the requested tolerance.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

}  // namespace ecotherm
