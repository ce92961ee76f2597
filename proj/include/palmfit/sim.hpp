#pragma once

#include "palmfit/core.hpp"
#include "palmfit/rng.hpp"

namespace palmfit {

// Margin beyond the window for parent generation. Covers >= 99.99% of the
// Gaussian offspring mass (Thomas) and the full hard support (Matern, void).
double default_buffer(const ProcessParams& params);

struct SimConfig {
  ProcessParams params;
  Window window;
  double buffer = -1.0;  // < 0 selects default_buffer(params)
};

// Simulation with the internal bookkeeping kept: parents live outside the
// public pattern (they are unobserved) but tests assert against them.
struct SimTrace {
  PointPattern pattern;
  std::vector<double> parents;             // flattened, window dim
  std::vector<std::int64_t> parent_index;  // per retained daughter; -1 for void survivors
};

SimTrace simulate_trace(const SimConfig& cfg, RngStream& rng);

PointPattern simulate_poisson(double intensity, const Window& window, RngStream& rng);
PointPattern simulate_thomas(const ThomasParams& params, const Window& window,
                             double buffer, RngStream& rng);
PointPattern simulate_matern(const MaternParams& params, const Window& window,
                             double buffer, RngStream& rng);
PointPattern simulate_void(const VoidParams& params, const Window& window,
                           double buffer, RngStream& rng);

PointPattern simulate(const SimConfig& cfg, RngStream& rng);

}  // namespace palmfit
