#pragma once

#include <complex>

#include "cagefit/circuit.hpp"
#include "cagefit/sampling.hpp"

namespace testutil {

inline std::complex<double> parallel(std::complex<double> a,
                                     std::complex<double> b) {
  return a * b / (a + b);
}

/// Random parameter set from the standard ranges, re-drawn until the cage
/// ordering constraints hold. Acceptance rate is roughly a third, so this
/// terminates fast.
inline cagefit::CircuitParams random_feasible(cagefit::Rng& rng) {
  for (;;) {
    const cagefit::CircuitParams p = cagefit::sample_params(rng);
    if (p.feasible()) return p;
  }
}

/// Relative closeness with an absolute fallback when the reference is 0.
inline bool close_rel(double actual, double expected, double rel,
                      double abs_at_zero = 1e-12) {
  if (expected == 0.0) return std::abs(actual) <= abs_at_zero;
  return std::abs(actual - expected) <= rel * std::abs(expected);
}

}  // namespace testutil
