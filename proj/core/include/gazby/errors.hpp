#pragma once

#include <stdexcept>
#include <string>

namespace gazby {

// Bad inputs: malformed files, shape mismatches, violated preconditions.
// The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// NaN/Inf encountered where the contract requires finite values.
// The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gazby
