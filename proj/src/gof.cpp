#include "palmfit/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "palmfit/parallel.hpp"
#include "palmfit/sim.hpp"

namespace palmfit {

namespace {

void grid_location(const Window& region, int grid, int d, std::size_t index,
                   std::vector<double>& out) {
  out.resize(d);
  for (int k = d - 1; k >= 0; --k) {
    const std::size_t cell = index % grid;
    index /= grid;
    out[k] = region.lower[k] + (static_cast<double>(cell) + 0.5) *
                                   (region.upper[k] - region.lower[k]) / grid;
  }
}

std::vector<double> nearest_grid_impl(const PointPattern& p, const Window& region,
                                      int grid, bool parallel) {
  if (grid < 1) throw std::invalid_argument("nearest_distance_grid: grid must be >= 1");
  if (p.size() == 0) throw std::invalid_argument("nearest_distance_grid: empty pattern");
  const int d = p.dim();
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(grid);

  std::vector<double> nearest(total);
  const std::size_t n = p.size();
  const auto body = [&](std::size_t g) {
    thread_local std::vector<double> loc;
    grid_location(region, grid, d, g, loc);
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const auto pt = p.point(j);
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = loc[k] - pt[k];
        s += diff * diff;
      }
      best2 = std::min(best2, s);
    }
    nearest[g] = std::sqrt(best2);
  };
  if (parallel) {
    parallel_for(total, body);
  } else {
    for (std::size_t g = 0; g < total; ++g) body(g);
  }
  return nearest;
}

}  // namespace

std::vector<double> nearest_distance_grid(const PointPattern& p, const Window& region,
                                          int grid_per_side) {
  return nearest_grid_impl(p, region, grid_per_side, true);
}

std::vector<double> nearest_distance_grid_serial(const PointPattern& p,
                                                 const Window& region,
                                                 int grid_per_side) {
  return nearest_grid_impl(p, region, grid_per_side, false);
}

EsfCurve empty_space_function(const PointPattern& p, const std::vector<double>& radii,
                              int grid_per_side) {
  if (p.size() == 0) throw std::invalid_argument("empty_space_function: empty pattern");
  if (radii.empty()) throw std::invalid_argument("empty_space_function: no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 0.0 || (i > 0 && radii[i] <= radii[i - 1]))
      throw std::invalid_argument("empty_space_function: radii must be ascending and >= 0");
  }

  // Minus sampling: erode the window by the largest radius so every test
  // location sees its full ball inside the window.
  const double margin = radii.back();
  std::vector<double> lo = p.window.lower;
  std::vector<double> hi = p.window.upper;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    lo[k] += margin;
    hi[k] -= margin;
    if (!(hi[k] > lo[k]))
      throw std::invalid_argument(
          "empty_space_function: window too small for erosion; reduce max radius");
  }
  const Window region(std::move(lo), std::move(hi));

  const std::vector<double> nearest = nearest_distance_grid(p, region, grid_per_side);
  std::vector<double> sorted = nearest;
  std::sort(sorted.begin(), sorted.end());

  EsfCurve curve;
  curve.kind = EsfCurve::Kind::observed;
  curve.radii = radii;
  curve.F.resize(radii.size());
  const double total = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), radii[i]);
    curve.F[i] = static_cast<double>(it - sorted.begin()) / total;
  }
  return curve;
}

GofEnvelope gof_envelope(const PointPattern& p, const ProcessParams& fitted, int nsim,
                         const std::vector<double>& radii, RngStream& rng,
                         int grid_per_side) {
  if (nsim < 2) throw std::invalid_argument("gof_envelope: need at least 2 simulations");

  GofEnvelope envelope;
  envelope.observed = empty_space_function(p, radii, grid_per_side);

  std::vector<std::vector<double>> curves(nsim);
  parallel_for(static_cast<std::size_t>(nsim), [&](std::size_t s) {
    RngStream local = rng.substream(s);
    const PointPattern sim = simulate({fitted, p.window, -1.0}, local);
    if (sim.size() == 0) {
      curves[s].assign(radii.size(), 0.0);  // nothing within any radius
      return;
    }
    curves[s] = empty_space_function(sim, radii, grid_per_side).F;
  });

  envelope.lo.kind = EsfCurve::Kind::simulated;
  envelope.hi.kind = EsfCurve::Kind::simulated;
  envelope.lo.radii = radii;
  envelope.hi.radii = radii;
  envelope.lo.F.resize(radii.size());
  envelope.hi.F.resize(radii.size());

  int inside = 0;
  std::vector<double> column(nsim);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    for (int s = 0; s < nsim; ++s) column[s] = curves[s][i];
    envelope.lo.F[i] = sample_quantile(column, 0.025);
    envelope.hi.F[i] = sample_quantile(column, 0.975);
    if (envelope.observed.F[i] >= envelope.lo.F[i] &&
        envelope.observed.F[i] <= envelope.hi.F[i])
      ++inside;
  }
  envelope.inside_fraction = static_cast<double>(inside) / static_cast<double>(radii.size());
  return envelope;
}

}  // namespace palmfit
