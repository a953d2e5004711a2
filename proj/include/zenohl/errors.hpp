#pragma once

#include <stdexcept>
#include <string>

namespace zenohl {

// Invalid user-facing input (bad config values, malformed files, out-of-range
// arguments). The CLI maps this to exit code 1.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A numerical procedure left its validated regime (propagator not converging,
// eigenphase outside the log window, norm drift). CLI exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariant; indicates a bug, not bad input. CLI exit code 2.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace zenohl
