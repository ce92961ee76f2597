#include "palmfit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "palmfit/optimize.hpp"
#include "palmfit/palm.hpp"
#include "palmfit/specfun.hpp"

namespace palmfit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::poisson: return "poisson";
    case ModelKind::thomas: return "thomas";
    case ModelKind::matern: return "matern";
    case ModelKind::void_process: return "void";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "poisson") return ModelKind::poisson;
  if (name == "thomas") return ModelKind::thomas;
  if (name == "matern") return ModelKind::matern;
  if (name == "void") return ModelKind::void_process;
  throw std::invalid_argument("unknown model '" + name + "'");
}

ModelKind kind_of(const ProcessParams& params) {
  if (std::holds_alternative<PoissonParams>(params)) return ModelKind::poisson;
  if (std::holds_alternative<ThomasParams>(params)) return ModelKind::thomas;
  if (std::holds_alternative<MaternParams>(params)) return ModelKind::matern;
  return ModelKind::void_process;
}

std::vector<double> params_to_vector(const ProcessParams& params) {
  return std::visit(
      [](const auto& p) -> std::vector<double> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PoissonParams>) return {p.intensity};
        else if constexpr (std::is_same_v<T, ThomasParams>)
          return {p.parent_intensity, p.mean_offspring, p.dispersion};
        else if constexpr (std::is_same_v<T, MaternParams>)
          return {p.parent_intensity, p.mean_offspring, p.radius};
        else
          return {p.parent_intensity, p.radius, p.daughter_intensity};
      },
      params);
}

ProcessParams vector_to_params(ModelKind kind, std::span<const double> v) {
  switch (kind) {
    case ModelKind::poisson:
      return PoissonParams{v[0]};
    case ModelKind::thomas:
      return ThomasParams{v[0], v[1], v[2]};
    case ModelKind::matern:
      return MaternParams{v[0], v[1], v[2]};
    case ModelKind::void_process:
      return VoidParams{v[0], v[1], v[2]};
  }
  throw std::logic_error("vector_to_params: bad kind");
}

double palm_likelihood_integral(ModelKind kind, const ProcessParams& params, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("palm_likelihood_integral: t must be positive");
  switch (kind) {
    case ModelKind::poisson:
      return std::get<PoissonParams>(params).intensity * M_PI * t * t;
    case ModelKind::thomas: {
      const auto& p = std::get<ThomasParams>(params);
      const double cdf = -std::expm1(-t * t / (4.0 * p.dispersion * p.dispersion));
      return p.parent_intensity * p.mean_offspring * M_PI * t * t +
             p.mean_offspring * cdf;
    }
    case ModelKind::matern: {
      const auto& p = std::get<MaternParams>(params);
      return p.parent_intensity * p.mean_offspring * M_PI * t * t +
             p.mean_offspring * matern_sibling_cdf(t, p.radius, 2);
    }
    case ModelKind::void_process: {
      const auto& p = std::get<VoidParams>(params);
      const double breakpoint = 2.0 * p.radius;
      const double head = std::min(t, breakpoint);
      double total = 2.0 * M_PI *
                     integrate(QuadratureRule::gauss64(),
                               [&](double r) { return r * palm_void(r, p, 2); }, 0.0, head);
      if (t > breakpoint) {
        const double tail_level =
            p.daughter_intensity *
            std::exp(-p.parent_intensity * M_PI * p.radius * p.radius);
        total += tail_level * M_PI * (t * t - breakpoint * breakpoint);
      }
      return total;
    }
  }
  throw std::logic_error("palm_likelihood_integral: bad kind");
}

double window_pair_coverage(double r, const Window& w) {
  if (w.dim() != 2)
    throw std::invalid_argument("window_pair_coverage: 2D windows only");
  if (r < 0.0) throw std::domain_error("window_pair_coverage: r must be nonnegative");
  const double a = w.side(0);
  const double b = w.side(1);
  // Isotropised set covariance of a rectangle, valid for r <= min(a, b).
  const double c = 1.0 - 2.0 * r * (a + b) / (M_PI * a * b) + r * r / (M_PI * a * b);
  return std::max(c, 0.0);
}

double palm_likelihood_integral_windowed(ModelKind kind, const ProcessParams& params,
                                         double t, const Window& w) {
  if (!(t > 0.0))
    throw std::invalid_argument("palm_likelihood_integral_windowed: t must be positive");
  const double a = w.side(0);
  const double b = w.side(1);
  const double alpha = 2.0 * (a + b) / (M_PI * a * b);
  const double beta = 1.0 / (M_PI * a * b);
  // Closed form of 2 pi int r c_W(r) dr for the flat stretches.
  const auto flat_piece = [&](double lo, double hi) {
    const auto antideriv = [&](double r) {
      return r * r / 2.0 - alpha * r * r * r / 3.0 + beta * r * r * r * r / 4.0;
    };
    return 2.0 * M_PI * (antideriv(hi) - antideriv(lo));
  };

  switch (kind) {
    case ModelKind::poisson:
      return std::get<PoissonParams>(params).intensity * flat_piece(0.0, t);
    case ModelKind::thomas: {
      const auto& p = std::get<ThomasParams>(params);
      return 2.0 * M_PI *
             integrate(QuadratureRule::gauss64(),
                       [&](double r) { return r * palm_thomas(r, p) * window_pair_coverage(r, w); },
                       0.0, t);
    }
    case ModelKind::matern: {
      const auto& p = std::get<MaternParams>(params);
      const double head = std::min(t, 2.0 * p.radius);
      double total = 2.0 * M_PI *
                     integrate(QuadratureRule::gauss64(),
                               [&](double r) {
                                 return r * palm_matern(r, p, 2) * window_pair_coverage(r, w);
                               },
                               0.0, head);
      if (t > head)
        total += p.parent_intensity * p.mean_offspring * flat_piece(head, t);
      return total;
    }
    case ModelKind::void_process: {
      const auto& p = std::get<VoidParams>(params);
      const double head = std::min(t, 2.0 * p.radius);
      double total = 2.0 * M_PI *
                     integrate(QuadratureRule::gauss64(),
                               [&](double r) {
                                 return r * palm_void(r, p, 2) * window_pair_coverage(r, w);
                               },
                               0.0, head);
      if (t > head) {
        const double tail_level =
            p.daughter_intensity *
            std::exp(-p.parent_intensity * M_PI * p.radius * p.radius);
        total += tail_level * flat_piece(head, t);
      }
      return total;
    }
  }
  throw std::logic_error("palm_likelihood_integral_windowed: bad kind");
}

namespace {

// Sum over stored (unordered) pair distances of log(n lambda(r)); -inf when
// the intensity underflows to zero.
double pair_log_sum(ModelKind kind, const ProcessParams& params,
                    std::span<const double> distances, int n) {
  double sum = 0.0;
  for (double r : distances) {
    double intensity = 0.0;
    switch (kind) {
      case ModelKind::poisson:
        intensity = std::get<PoissonParams>(params).intensity;
        break;
      case ModelKind::thomas:
        intensity = palm_thomas(r, std::get<ThomasParams>(params));
        break;
      case ModelKind::matern:
        intensity = palm_matern(r, std::get<MaternParams>(params), 2);
        break;
      case ModelKind::void_process:
        intensity = palm_void(r, std::get<VoidParams>(params), 2);
        break;
    }
    if (!(intensity > 0.0) || !std::isfinite(intensity)) return -kInf;
    sum += std::log(static_cast<double>(n) * intensity);
  }
  return sum;
}

}  // namespace

double palm_loglik(ModelKind kind, const ProcessParams& params,
                   std::span<const double> distances, int n, double t) {
  if (n < 2) throw std::invalid_argument("palm_loglik: need n >= 2");
  for (double v : params_to_vector(params))
    if (std::isnan(v)) throw std::invalid_argument("palm_loglik: NaN parameter");
  if (!distances.empty() && distances.back() > t)
    throw std::invalid_argument("palm_loglik: distance beyond truncation");

  const double sum = pair_log_sum(kind, params, distances, n);
  if (!std::isfinite(sum)) return -kInf;
  // Each unordered pair enters twice (the difference process is over ordered
  // pairs); the integral term appears once with the pattern size n.
  return 2.0 * sum - n * palm_likelihood_integral(kind, params, t);
}

ProcessParams default_start(ModelKind kind, const PointPattern& p, double t) {
  const double intensity = pattern_intensity(p);
  const int d = p.dim();
  switch (kind) {
    case ModelKind::poisson:
      return PoissonParams{std::max(intensity, 1e-12)};
    case ModelKind::thomas:
    case ModelKind::matern: {
      const auto distances = pairwise_distances(p, t);
      const double neighbours =
          2.0 * static_cast<double>(distances.size()) / static_cast<double>(p.size());
      const double excess = neighbours - intensity * sphere_volume(d, t);
      const double offspring = std::max(excess, 1.0);
      const double parents = std::max(intensity / offspring, 1e-12);
      if (kind == ModelKind::thomas) return ThomasParams{parents, offspring, t / 4.0};
      return MaternParams{parents, offspring, t / 4.0};
    }
    case ModelKind::void_process: {
      const double lambda0 = 1.5 * std::max(intensity, 1e-12);
      const double radius0 = t / 4.0;
      const double parents0 =
          std::max(std::log(1.5) / sphere_volume(d, radius0), 1e-12);
      return VoidParams{parents0, radius0, lambda0};
    }
  }
  throw std::logic_error("default_start: bad kind");
}

double cluster_truncation(const PointPattern& p) {
  const double r_max = p.window.min_side() / 4.0;
  const auto distances = pairwise_distances(p, r_max);
  const double intensity = pattern_intensity(p);
  const double n = static_cast<double>(p.size());
  const int d = p.dim();

  // Cumulative neighbour excess over the Poisson baseline; it saturates once
  // r covers the cluster diameter.
  const int grid = 64;
  std::vector<double> excess(grid);
  double peak = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double r = r_max * (k + 1) / grid;
    const auto it = std::upper_bound(distances.begin(), distances.end(), r);
    const double neighbours = 2.0 * static_cast<double>(it - distances.begin()) / n;
    excess[k] = neighbours - intensity * sphere_volume(d, r);
    peak = std::max(peak, excess[k]);
  }
  if (!(peak > 0.0)) return r_max / 2.0;  // no clustering signal
  double saturation = r_max;
  for (int k = 0; k < grid; ++k) {
    if (excess[k] >= 0.95 * peak) {
      saturation = r_max * (k + 1) / grid;
      break;
    }
  }
  return std::clamp(1.5 * saturation, r_max / 16.0, r_max);
}

namespace {

std::vector<ProcessParams> start_grid(ModelKind kind, const PointPattern& p, double t) {
  const ProcessParams base = default_start(kind, p, t);
  std::vector<ProcessParams> grid{base};
  if (kind == ModelKind::poisson) return grid;
  for (double factor : {2.5, 0.4}) {
    auto v = params_to_vector(base);
    if (kind == ModelKind::void_process) {
      // Rescale the radius and keep the implied thinning consistent.
      v[1] *= factor;
      v[0] /= factor * factor;
    } else {
      v[2] *= factor;
    }
    grid.push_back(vector_to_params(kind, v));
  }
  if (kind == ModelKind::void_process) {
    // Anchor starts on the manifold where the implied global density
    // lambda exp(-D pi R^2) matches the observed intensity.
    const double observed = pattern_intensity(p);
    for (std::size_t i = 0; i < 3; ++i) {
      auto v = params_to_vector(grid[i]);
      v[2] = observed * std::exp(v[0] * M_PI * v[1] * v[1]);
      grid.push_back(vector_to_params(kind, v));
    }
  }
  return grid;
}

// Structural default bounds keep the optimizer off the unidentifiable ridges:
// a void radius beyond the window or a daughter intensity far from the
// observed density mimics arbitrary smooth decay profiles.
std::vector<std::pair<double, double>> default_bounds(ModelKind kind,
                                                      const PointPattern& p, double t) {
  const double intensity = std::max(pattern_intensity(p), 1e-12);
  const double side = p.window.min_side();
  switch (kind) {
    case ModelKind::poisson:
      return {{intensity * 1e-4, intensity * 1e4}};
    case ModelKind::thomas:
    case ModelKind::matern:
      return {{1e-6, 1e6}, {1e-3, 1e4}, {t * 1e-3, 2.0 * t}};
    case ModelKind::void_process:
      return {{1e-6, 1e5}, {side * 1e-4, side / 2.0}, {intensity * 0.5, intensity * 10.0}};
  }
  throw std::logic_error("default_bounds: bad kind");
}

}  // namespace

FitResult fit_model(const PointPattern& p, const FitConfig& cfg) {
  if (!(cfg.truncation > 0.0))
    throw std::invalid_argument("fit_model: truncation must be positive");
  if (p.size() < 2) throw std::invalid_argument("fit_model: insufficient points");
  if (p.dim() != 2) throw std::invalid_argument("fit_model: 2D patterns only");

  FitResult result;
  result.truncation = cfg.truncation;
  if (cfg.truncation > p.window.min_side() / 2.0)
    result.warnings.push_back("truncation exceeds half the shortest window side");

  const auto distances = pairwise_distances(p, cfg.truncation);
  if (distances.empty())
    throw std::invalid_argument("fit_model: no point pairs within truncation");
  result.n_pairs_used = static_cast<int>(distances.size());
  const int n = static_cast<int>(p.size());

  const std::vector<ProcessParams> starts =
      cfg.start ? std::vector<ProcessParams>{*cfg.start}
                : start_grid(cfg.model, p, cfg.truncation);

  const std::size_t n_params = params_to_vector(starts.front()).size();
  std::vector<std::pair<double, double>> bounds =
      cfg.bounds.empty() ? default_bounds(cfg.model, p, cfg.truncation) : cfg.bounds;
  if (bounds.size() != n_params)
    throw std::invalid_argument("fit_model: bounds size does not match parameter count");
  for (const auto& [lo, hi] : bounds)
    if (!(lo > 0.0) || !(hi > lo))
      throw std::invalid_argument("fit_model: bounds must be positive with lo < hi");

  std::vector<double> log_lo(n_params), log_hi(n_params);
  for (std::size_t i = 0; i < n_params; ++i) {
    log_lo[i] = std::log(bounds[i].first);
    log_hi[i] = std::log(bounds[i].second);
  }

  const auto objective = [&](std::span<const double> x) -> double {
    std::vector<double> v(n_params);
    for (std::size_t i = 0; i < n_params; ++i) {
      if (x[i] < log_lo[i] || x[i] > log_hi[i]) return kInf;
      v[i] = std::exp(x[i]);
    }
    const ProcessParams candidate = vector_to_params(cfg.model, v);
    const double sum = pair_log_sum(cfg.model, candidate, distances, n);
    if (!std::isfinite(sum)) return kInf;
    const double integral =
        cfg.edge_correction
            ? palm_likelihood_integral_windowed(cfg.model, candidate, cfg.truncation,
                                                p.window)
            : palm_likelihood_integral(cfg.model, candidate, cfg.truncation);
    const double ll = 2.0 * sum - n * integral;
    return std::isfinite(ll) ? -ll : kInf;
  };

  bool have_best = false;
  double best_value = kInf;
  std::vector<double> best_x;
  int best_iterations = 0;
  bool best_converged = false;

  for (const auto& start : starts) {
    auto v = params_to_vector(start);
    std::vector<double> x(n_params);
    for (std::size_t i = 0; i < n_params; ++i)
      x[i] = std::clamp(std::log(v[i]), log_lo[i] + 1e-9, log_hi[i] - 1e-9);

    NelderMeadOptions nm;
    nm.tolerance = cfg.optimizer.tolerance;
    nm.max_iterations = cfg.optimizer.max_iterations;
    nm.initial_step = 0.5;

    auto run = nelder_mead(objective, x, nm);
    int iterations = run.iterations;
    for (int r = 1; r <= cfg.optimizer.restarts; ++r) {
      nm.initial_step = 0.5 / (1 << r);
      auto again = nelder_mead(objective, run.x, nm);
      iterations += again.iterations;
      if (again.value <= run.value) run = std::move(again);
    }

    if (!std::isfinite(run.value)) continue;
    const bool better = !have_best || run.value < best_value ||
                        (run.value == best_value && iterations < best_iterations);
    if (better) {
      have_best = true;
      best_value = run.value;
      best_x = run.x;
      best_iterations = iterations;
      best_converged = run.converged;
    }
  }

  if (!have_best) {
    std::ostringstream msg;
    msg << "optimization failed: no start reached a finite Palm log-likelihood (model "
        << to_string(cfg.model) << ", t " << cfg.truncation << ", pairs "
        << distances.size() << ")";
    throw std::runtime_error(msg.str());
  }

  std::vector<double> v(n_params);
  for (std::size_t i = 0; i < n_params; ++i) v[i] = std::exp(best_x[i]);
  result.params = vector_to_params(cfg.model, v);
  result.loglik = -best_value;
  result.iterations = best_iterations;
  result.converged = best_converged;

  if (cfg.model == ModelKind::void_process && cfg.collapse_weak_thinning) {
    // The void family nests the homogeneous model (D -> 0) and its raw MLE
    // happily fits micro-voids into Poisson noise. Collapse to the
    // no-thinning boundary unless the thinning passes a chi-squared(2)
    // likelihood-ratio test at the 99% level.
    const double unit_integral =
        cfg.edge_correction
            ? palm_likelihood_integral_windowed(ModelKind::poisson,
                                                PoissonParams{1.0}, cfg.truncation,
                                                p.window)
            : palm_likelihood_integral(ModelKind::poisson, PoissonParams{1.0},
                                       cfg.truncation);
    const double m = static_cast<double>(distances.size());
    const double flat_intensity = 2.0 * m / (n * unit_integral);
    const double flat_loglik =
        2.0 * m * std::log(n * flat_intensity) - 2.0 * m;
    if (2.0 * (result.loglik - flat_loglik) < 9.210) {  // chi2(2), 0.99
      result.params = VoidParams{bounds[0].first, cfg.truncation / 4.0, flat_intensity};
      result.loglik = flat_loglik;
      result.warnings.push_back(
          "void thinning not supported by the likelihood ratio; "
          "returning the no-thinning boundary");
    }
  }

  if (cfg.model == ModelKind::thomas) {
    const auto& q = std::get<ThomasParams>(result.params);
    result.daughter_density = q.parent_intensity * q.mean_offspring;
  } else if (cfg.model == ModelKind::matern) {
    const auto& q = std::get<MaternParams>(result.params);
    result.daughter_density = q.parent_intensity * q.mean_offspring;
  }
  return result;
}

FitResult fit_void_auto(const PointPattern& p, FitConfig cfg) {
  cfg.model = ModelKind::void_process;
  const double radius_guess = p.window.min_side() / 10.0;
  cfg.truncation = std::min(2.5 * radius_guess, p.window.min_side() / 2.0);
  return fit_model(p, cfg);
}

}  // namespace palmfit
