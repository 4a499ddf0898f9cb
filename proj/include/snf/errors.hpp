#pragma once

#include <stdexcept>

namespace snf {

// Model/stucture configuration problems (dimension or structure mismatch).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adaptive step size collapsed below the resolvable scale.
struct StiffnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integration produced a non-finite state.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Density estimation failed (e.g. every conditional solve diverged).
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gradient computation failed (solver failure inside the adjoint).
struct GradientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested scheme does not support the model's noise structure.
struct UnsupportedStructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace snf
