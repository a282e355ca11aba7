#pragma once

#include <stdexcept>
#include <string>

namespace aitv {

// Invalid parameter values (negative widths, alpha outside [0,1], ...).
// The CLI maps these to exit code 2.
class ParamError : public std::invalid_argument {
 public:
  explicit ParamError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Bad input data: dimension mismatches, negative intensities, unreadable or
// malformed files.  Exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown: NaN/Inf produced by an iteration, vanishing spectral
// denominators, non-real inverse transforms.  Exit code 4.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace aitv
