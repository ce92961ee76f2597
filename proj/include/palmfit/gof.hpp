#pragma once

#include <vector>

#include "palmfit/core.hpp"
#include "palmfit/rng.hpp"

namespace palmfit {

// Empty space function F(r): the probability that a random test location has
// a data point within distance r.
struct EsfCurve {
  enum class Kind { observed, simulated };
  std::vector<double> radii;
  std::vector<double> F;
  Kind kind = Kind::observed;
};

// Nearest-data-point distance for every location of a regular grid with
// `grid_per_side` cells per axis over `region` (cell centers). Parallel over
// grid locations; the serial twin is the reference it is tested against.
std::vector<double> nearest_distance_grid(const PointPattern& p, const Window& region,
                                          int grid_per_side);
std::vector<double> nearest_distance_grid_serial(const PointPattern& p,
                                                 const Window& region,
                                                 int grid_per_side);

// Grid estimate of F with minus-sampling border correction: test locations
// live on the window eroded by max(radii). Throws when the erosion empties
// the window (reduce the largest radius).
EsfCurve empty_space_function(const PointPattern& p, const std::vector<double>& radii,
                              int grid_per_side = 128);

struct GofEnvelope {
  EsfCurve observed;
  EsfCurve lo;  // pointwise 2.5% across simulations
  EsfCurve hi;  // pointwise 97.5%
  double inside_fraction = 0.0;
};

// Simulates `nsim` patterns from the fitted parameters in the observed
// window and wraps the observed F in the pointwise envelope. Simulation s
// always uses rng.substream(s), so the envelope does not depend on the
// worker-pool size.
GofEnvelope gof_envelope(const PointPattern& p, const ProcessParams& fitted, int nsim,
                         const std::vector<double>& radii, RngStream& rng,
                         int grid_per_side = 128);

}  // namespace palmfit
