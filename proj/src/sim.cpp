#include "palmfit/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace palmfit {

namespace {

Window buffered(const Window& w, double margin) {
  std::vector<double> lo = w.lower;
  std::vector<double> hi = w.upper;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] -= margin;
    hi[i] += margin;
  }
  return Window(std::move(lo), std::move(hi));
}

// Poisson(intensity * |w|) points, i.i.d. uniform in w, flattened.
std::vector<double> poisson_points(double intensity, const Window& w, RngStream& rng) {
  const std::uint64_t count = rng.poisson(intensity * w.volume());
  const int d = w.dim();
  std::vector<double> coords;
  coords.reserve(count * d);
  for (std::uint64_t i = 0; i < count; ++i)
    for (int k = 0; k < d; ++k)
      coords.push_back(rng.uniform(w.lower[k], w.upper[k]));
  return coords;
}

// Uniform direction via normalised Gaussians, radius ~ R u^(1/d).
void ball_offset(double radius, int d, RngStream& rng, std::vector<double>& out) {
  out.resize(d);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (int k = 0; k < d; ++k) {
      out[k] = rng.normal();
      norm2 += out[k] * out[k];
    }
  } while (norm2 == 0.0);
  const double r = radius * std::pow(rng.uniform(), 1.0 / d);
  const double scale = r / std::sqrt(norm2);
  for (int k = 0; k < d; ++k) out[k] *= scale;
}

}  // namespace

double default_buffer(const ProcessParams& params) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ThomasParams>) return 6.0 * p.dispersion;
        else if constexpr (std::is_same_v<T, MaternParams>) return p.radius;
        else if constexpr (std::is_same_v<T, VoidParams>) return p.radius;
        else return 0.0;
      },
      params);
}

SimTrace simulate_trace(const SimConfig& cfg, RngStream& rng) {
  validate(cfg.params);
  const double margin = cfg.buffer < 0.0 ? default_buffer(cfg.params) : cfg.buffer;
  const Window& w = cfg.window;
  const int d = w.dim();

  SimTrace trace;

  if (const auto* poisson = std::get_if<PoissonParams>(&cfg.params)) {
    trace.pattern = PointPattern(poisson_points(poisson->intensity, w, rng), w);
    trace.parent_index.assign(trace.pattern.size(), -1);
    return trace;
  }

  if (const auto* voidp = std::get_if<VoidParams>(&cfg.params)) {
    std::vector<double> daughters = poisson_points(voidp->daughter_intensity, w, rng);
    trace.parents = poisson_points(voidp->parent_intensity, buffered(w, margin), rng);
    const std::size_t n_par = trace.parents.size() / d;
    std::vector<double> kept;
    for (std::size_t i = 0; i * d < daughters.size(); ++i) {
      const std::span<const double> x(daughters.data() + i * d, d);
      bool safe = true;
      for (std::size_t j = 0; j < n_par; ++j) {
        if (euclidean_distance(x, {trace.parents.data() + j * d,
                                   static_cast<std::size_t>(d)}) < voidp->radius) {
          safe = false;
          break;
        }
      }
      if (safe) kept.insert(kept.end(), x.begin(), x.end());
    }
    trace.pattern = PointPattern(std::move(kept), w);
    trace.parent_index.assign(trace.pattern.size(), -1);
    return trace;
  }

  // Thomas / Matern: Poisson parents on the buffered window, Poisson(nu)
  // daughters each, dispersal per model, daughters outside the window dropped.
  const bool thomas = std::holds_alternative<ThomasParams>(cfg.params);
  double parent_intensity, mean_offspring, scale;
  if (thomas) {
    const auto& p = std::get<ThomasParams>(cfg.params);
    parent_intensity = p.parent_intensity;
    mean_offspring = p.mean_offspring;
    scale = p.dispersion;
  } else {
    const auto& p = std::get<MaternParams>(cfg.params);
    parent_intensity = p.parent_intensity;
    mean_offspring = p.mean_offspring;
    scale = p.radius;
  }

  trace.parents = poisson_points(parent_intensity, buffered(w, margin), rng);
  const std::size_t n_par = trace.parents.size() / d;
  std::vector<double> kept;
  std::vector<double> offset(d);
  std::vector<double> child(d);
  for (std::size_t j = 0; j < n_par; ++j) {
    const std::uint64_t litter = rng.poisson(mean_offspring);
    for (std::uint64_t c = 0; c < litter; ++c) {
      if (thomas) {
        for (int k = 0; k < d; ++k) offset[k] = rng.normal(0.0, scale);
      } else {
        ball_offset(scale, d, rng, offset);
      }
      for (int k = 0; k < d; ++k) child[k] = trace.parents[j * d + k] + offset[k];
      if (w.contains(child)) {
        kept.insert(kept.end(), child.begin(), child.end());
        trace.parent_index.push_back(static_cast<std::int64_t>(j));
      }
    }
  }
  trace.pattern = PointPattern(std::move(kept), w);
  return trace;
}

PointPattern simulate(const SimConfig& cfg, RngStream& rng) {
  return simulate_trace(cfg, rng).pattern;
}

PointPattern simulate_poisson(double intensity, const Window& window, RngStream& rng) {
  return simulate({PoissonParams{intensity}, window, 0.0}, rng);
}

PointPattern simulate_thomas(const ThomasParams& params, const Window& window,
                             double buffer, RngStream& rng) {
  return simulate({params, window, buffer}, rng);
}

PointPattern simulate_matern(const MaternParams& params, const Window& window,
                             double buffer, RngStream& rng) {
  return simulate({params, window, buffer}, rng);
}

PointPattern simulate_void(const VoidParams& params, const Window& window,
                           double buffer, RngStream& rng) {
  return simulate({params, window, buffer}, rng);
}

}  // namespace palmfit
