#pragma once

#include "palmfit/core.hpp"

namespace palmfit {

// Class cover catch digraph radii: for each point its distance to the
// nearest point of the other class. Only the ball radii are materialised
// (they are what informs the likelihood truncation), not the digraph edges.
struct CccdSummary {
  std::vector<double> radii_x;  // per point of X, distance to nearest Y
  std::vector<double> radii_y;
  double suggested_t = 0.0;     // quantile of the pooled radii
};

// Linear-interpolation quantile of the pooled radii (default the 90th
// percentile, which resists isolated outlier cells). Throws when either
// class is empty.
CccdSummary cccd_radii(const PointPattern& x, const PointPattern& y,
                       double quantile = 0.9);

CccdSummary cccd_radii_serial(const PointPattern& x, const PointPattern& y,
                              double quantile = 0.9);

}  // namespace palmfit
