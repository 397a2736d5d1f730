#pragma once

#include <stdexcept>
#include <string>

namespace nvsense {

// Bad input: out-of-range parameters, malformed files, schema mismatches.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure failed (quadrature, root bracketing, degenerate fit).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace nvsense
