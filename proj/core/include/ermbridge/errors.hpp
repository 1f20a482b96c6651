// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ermbridge {

// Precondition violated at an API boundary (bad argument, dimension
// mismatch, out-of-range time, ...).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Input text could not be parsed; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

// A numeric computation produced non-finite values or failed a self-check.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver exhausted its budget; carries the last residual.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace ermbridge
