#include "palmfit/palm.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "palmfit/parallel.hpp"
#include "palmfit/specfun.hpp"

namespace palmfit {

double intersection_volume(double r, double radius, int d) {
  if (r < 0.0) throw std::domain_error("intersection_volume: r must be nonnegative");
  if (!(radius > 0.0)) throw std::domain_error("intersection_volume: radius must be positive");
  if (r >= 2.0 * radius) return 0.0;
  const double half = r / (2.0 * radius);
  const double z = 1.0 - half * half;
  return sphere_volume(d, radius) * reg_inc_beta(z, 0.5 * (d + 1), 0.5);
}

double palm_void(double r, const VoidParams& params, int d) {
  const double radius = params.radius;
  const double ball = d == 2 ? M_PI * radius * radius : sphere_volume(d, radius);
  if (r >= 2.0 * radius)
    return params.daughter_intensity * std::exp(-params.parent_intensity * ball);
  const double half = r / (2.0 * radius);
  double safe;
  if (d == 2) {
    // Elementary reduction of I(1-(r/2R)^2; 3/2, 1/2); agrees with the
    // continued-fraction route to machine precision and is cheap enough
    // for the likelihood inner loop.
    const double root = std::sqrt(1.0 - half * half);
    safe = (2.0 / M_PI) * (std::asin(root) - root * half);
  } else {
    safe = reg_inc_beta(1.0 - half * half, 0.5 * (d + 1), 0.5);
  }
  return params.daughter_intensity *
         std::exp(-params.parent_intensity * ball * (1.0 - safe));
}

double palm_thomas(double r, const ThomasParams& params) {
  const double s2 = params.dispersion * params.dispersion;
  return params.parent_intensity * params.mean_offspring +
         params.mean_offspring / (4.0 * M_PI * s2) * std::exp(-r * r / (4.0 * s2));
}

double matern_sibling_pdf(double r, double radius, int d) {
  if (!(radius > 0.0)) throw std::domain_error("matern_sibling_pdf: radius must be positive");
  if (r < 0.0) throw std::domain_error("matern_sibling_pdf: r must be nonnegative");
  if (r >= 2.0 * radius) return 0.0;
  const double b = 0.5 - 0.5 * d;
  const double z = (r * r) / (4.0 * radius * radius);
  const double bracket =
      hyp2f1_matern(b, 1.0) * radius - hyp2f1_matern(b, z) * 0.5 * r;
  return 2.0 * d / beta_fn(0.5 * d + 0.5, 0.5) *
         std::pow(r, d - 1) / std::pow(radius, d + 1) * bracket;
}

double matern_sibling_cdf(double t, double radius, int d) {
  if (!(radius > 0.0)) throw std::domain_error("matern_sibling_cdf: radius must be positive");
  if (t <= 0.0) return 0.0;
  if (t >= 2.0 * radius) return 1.0;
  if (d == 2) {
    // (t^2/R^2) (1 - B(a; 1/2, 3/2)/B(1/2, 3/2)) + 4 B(a; 3/2, 3/2)/B(1/2, 3/2)
    // with a = t^2/(4R^2); B(3/2,3/2)/B(1/2,3/2) = 1/4.
    const double ratio2 = (t * t) / (radius * radius);
    const double alpha = 0.25 * ratio2;
    return ratio2 * (1.0 - reg_inc_beta(alpha, 0.5, 1.5)) +
           reg_inc_beta(alpha, 1.5, 1.5);
  }
  if (d == 3) {
    const double u = t / radius;
    const double u3 = u * u * u;
    return u3 * u3 / 32.0 - 9.0 * u3 * u / 16.0 + u3;
  }
  return gauss_legendre([&](double r) { return matern_sibling_pdf(r, radius, d); },
                        0.0, t, 128);
}

double palm_matern(double r, const MaternParams& params, int d) {
  const double mean_total = params.parent_intensity * params.mean_offspring;
  const double radius = params.radius;
  if (r >= 2.0 * radius) return mean_total;
  const double b = 0.5 - 0.5 * d;
  const double z = (r * r) / (4.0 * radius * radius);
  const double bracket =
      hyp2f1_matern(b, 1.0) * radius - hyp2f1_matern(b, z) * 0.5 * r;
  const double prefactor = 2.0 * std::tgamma(0.5 * d + 1.0) /
                           (beta_fn(0.5 * d + 0.5, 0.5) *
                            std::pow(radius, d + 1) * std::pow(M_PI, 0.5 * d));
  return mean_total + params.mean_offspring * prefactor * bracket;
}

PalmCurve fitted_palm_curve(const ProcessParams& params,
                            const std::vector<double>& radii, int d) {
  validate(params);
  PalmCurve curve;
  curve.kind = PalmCurve::Kind::fitted;
  curve.radii = radii;
  curve.intensity.resize(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    curve.intensity[i] = std::visit(
        [&](const auto& q) -> double {
          using T = std::decay_t<decltype(q)>;
          if constexpr (std::is_same_v<T, PoissonParams>) return q.intensity;
          else if constexpr (std::is_same_v<T, ThomasParams>) return palm_thomas(r, q);
          else if constexpr (std::is_same_v<T, MaternParams>) return palm_matern(r, q, d);
          else return palm_void(r, q, d);
        },
        params);
  }
  return curve;
}

PalmCurve empirical_palm(const PointPattern& p, double t, int bins,
                         EmpiricalCenters centers) {
  if (!(t > 0.0)) throw std::invalid_argument("empirical_palm: t must be positive");
  if (bins < 2) throw std::invalid_argument("empirical_palm: need at least 2 bins");
  const std::size_t n = p.size();
  if (n < 2) throw std::invalid_argument("empirical_palm: insufficient points");
  const int d = p.dim();
  const double width = t / bins;

  std::vector<char> is_center(n, 1);
  std::size_t n_centers = n;
  if (centers == EmpiricalCenters::interior) {
    n_centers = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = p.point(i);
      bool inside = true;
      for (int k = 0; k < d; ++k) {
        if (x[k] - p.window.lower[k] < t || p.window.upper[k] - x[k] < t) {
          inside = false;
          break;
        }
      }
      is_center[i] = inside ? 1 : 0;
      if (inside) ++n_centers;
    }
    if (n_centers == 0)
      throw std::invalid_argument("empirical_palm: no interior centers; reduce t");
  }

  // Ordered pairs, one count per center; per-center rows keep the tally
  // independent of thread count.
  std::vector<std::vector<std::uint32_t>> rows(n);
  parallel_for(n, [&](std::size_t i) {
    if (!is_center[i]) return;
    auto& row = rows[i];
    row.assign(bins, 0);
    const auto xi = p.point(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dist = euclidean_distance(xi, p.point(j));
      if (dist > t) continue;
      int k = static_cast<int>(dist / width);
      if (k >= bins) k = bins - 1;
      ++row[k];
    }
  });

  std::vector<double> counts(bins, 0.0);
  for (const auto& row : rows)
    for (std::size_t k = 0; k < row.size(); ++k) counts[k] += row[k];

  PalmCurve curve;
  curve.kind = PalmCurve::Kind::empirical;
  curve.radii.resize(bins);
  curve.intensity.resize(bins);
  for (int k = 0; k < bins; ++k) {
    const double lo = k * width;
    const double hi = (k + 1) * width;
    const double shell = (hi > 0.0 ? sphere_volume(d, hi) : 0.0) -
                         (lo > 0.0 ? sphere_volume(d, lo) : 0.0);
    curve.radii[k] = 0.5 * (lo + hi);
    curve.intensity[k] = counts[k] / (static_cast<double>(n_centers) * shell);
  }
  return curve;
}

}  // namespace palmfit
