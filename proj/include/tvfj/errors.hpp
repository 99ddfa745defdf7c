#pragma once

#include <stdexcept>
#include <string>

namespace tvfj {

/// Input or model-consistency violation (bad dimensions, broken row
/// stochasticity, Assumption 1/2 failures, malformed scenarios).
/// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class DimensionError : public ValidationError {
 public:
  explicit DimensionError(const std::string& what) : ValidationError(what) {}
};

/// A certificate's premise does not hold (non-DTG window, ‖Φ(p,0)‖ ≥ 1,
/// singular phase system). The CLI maps this to exit code 3.
class CertificateUnavailable : public std::runtime_error {
 public:
  explicit CertificateUnavailable(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tvfj
