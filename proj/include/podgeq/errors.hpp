#pragma once

#include <stdexcept>

namespace podgeq {

/// Invalid configuration or ill-formed input (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown at run time: non-finite fields, solver divergence (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace podgeq
