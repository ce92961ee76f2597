#pragma once

#include <functional>
#include <span>
#include <vector>

namespace palmfit {

struct NelderMeadOptions {
  double initial_step = 0.5;
  double tolerance = 1e-6;    // spread |f(worst) - f(best)| at convergence
  int max_iterations = 500;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex minimisation (reflection / expansion / contraction /
// shrink with the standard coefficients). Deterministic: no randomised
// restarts, ties broken by index.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> start,
                             const NelderMeadOptions& options = {});

}  // namespace palmfit
