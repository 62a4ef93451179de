#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nonholo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or configuration; the CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  enum class Kind { Syntax, UnknownIdentifier, NonIntegerExponent };

  ParseError(Kind kind, std::size_t offset, const std::string& message)
      : ValidationError(message + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

// Evaluation inside the guard radius of a declared excluded set or pole.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A planner or solver ran but could not meet its target; exit code 3.
class TaskError : public Error {
 public:
  using Error::Error;
};

}  // namespace nonholo
