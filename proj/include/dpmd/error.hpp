#pragma once

#include <stdexcept>
#include <string>

namespace dpmd {

// Bad user input: malformed files, inconsistent shapes, out-of-range options.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical contract was violated at runtime: neighbor capacity overflow,
// stale neighbor list, table verification failure.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace dpmd
