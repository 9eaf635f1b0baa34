#pragma once

#include <stdexcept>
#include <string>

namespace qsvm {

// Gate index out of range, CNOT with control == target, qubit cap exceeded.
class InvalidGate : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// All particle momenta vanish, so no thrust axis exists.
class DegenerateEvent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Total energy does not exceed total momentum; no rest frame exists.
class UnphysicalEvent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MitigationUnreliable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qsvm
