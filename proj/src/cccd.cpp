#include "palmfit/cccd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "palmfit/parallel.hpp"

namespace palmfit {

namespace {

std::vector<double> nearest_other_class(const PointPattern& from, const PointPattern& to,
                                        bool parallel) {
  const std::size_t n = from.size();
  const std::size_t m = to.size();
  std::vector<double> radii(n);
  const auto body = [&](std::size_t i) {
    const auto xi = from.point(i);
    double best = euclidean_distance(xi, to.point(0));
    for (std::size_t j = 1; j < m; ++j)
      best = std::min(best, euclidean_distance(xi, to.point(j)));
    radii[i] = best;
  };
  if (parallel) {
    parallel_for(n, body);
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
  return radii;
}

CccdSummary build(const PointPattern& x, const PointPattern& y, double quantile,
                  bool parallel) {
  if (x.size() == 0 || y.size() == 0)
    throw std::invalid_argument("CCCD requires two nonempty classes");
  if (!(quantile > 0.0) || !(quantile <= 1.0))
    throw std::invalid_argument("cccd_radii: quantile must lie in (0, 1]");
  CccdSummary summary;
  summary.radii_x = nearest_other_class(x, y, parallel);
  summary.radii_y = nearest_other_class(y, x, parallel);
  std::vector<double> pooled = summary.radii_x;
  pooled.insert(pooled.end(), summary.radii_y.begin(), summary.radii_y.end());
  summary.suggested_t = sample_quantile(std::move(pooled), quantile);
  return summary;
}

}  // namespace

CccdSummary cccd_radii(const PointPattern& x, const PointPattern& y, double quantile) {
  return build(x, y, quantile, true);
}

CccdSummary cccd_radii_serial(const PointPattern& x, const PointPattern& y,
                              double quantile) {
  return build(x, y, quantile, false);
}

}  // namespace palmfit
