#include "palmfit/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "palmfit/parallel.hpp"

namespace palmfit {

Window::Window(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.empty() || lower.size() != upper.size())
    throw std::invalid_argument("Window: lower/upper must be nonempty and the same length");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(upper[i] > lower[i]))
      throw std::invalid_argument("Window: upper must exceed lower in every coordinate");
}

double Window::min_side() const {
  double m = upper[0] - lower[0];
  for (std::size_t i = 1; i < lower.size(); ++i) m = std::min(m, upper[i] - lower[i]);
  return m;
}

double Window::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
  return v;
}

bool Window::contains(std::span<const double> x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  return true;
}

PointPattern::PointPattern(std::vector<double> c, Window w, std::vector<std::string> m)
    : coords(std::move(c)), window(std::move(w)), marks(std::move(m)) {
  const int d = window.dim();
  if (d == 0) throw std::invalid_argument("PointPattern: window has no dimensions");
  if (coords.size() % d != 0)
    throw std::invalid_argument("PointPattern: coordinate count not a multiple of dimension");
  const std::size_t n = coords.size() / d;
  if (!marks.empty() && marks.size() != n)
    throw std::invalid_argument("PointPattern: marks must be empty or one per point");
  for (std::size_t i = 0; i < n; ++i)
    if (!window.contains({coords.data() + i * d, static_cast<std::size_t>(d)}))
      throw std::invalid_argument("PointPattern: point outside window");
}

void validate(const ProcessParams& params) {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("ProcessParams: ") + name +
                                  " must be strictly positive and finite");
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PoissonParams>) {
          positive(p.intensity, "intensity");
        } else if constexpr (std::is_same_v<T, ThomasParams>) {
          positive(p.parent_intensity, "parent_intensity");
          positive(p.mean_offspring, "mean_offspring");
          positive(p.dispersion, "dispersion");
        } else if constexpr (std::is_same_v<T, MaternParams>) {
          positive(p.parent_intensity, "parent_intensity");
          positive(p.mean_offspring, "mean_offspring");
          positive(p.radius, "radius");
        } else {
          positive(p.parent_intensity, "parent_intensity");
          positive(p.radius, "radius");
          positive(p.daughter_intensity, "daughter_intensity");
        }
      },
      params);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

std::vector<double> pairwise_distances(const PointPattern& p, double trunc) {
  if (!(trunc > 0.0)) throw std::invalid_argument("pairwise_distances: truncation must be positive");
  const std::size_t n = p.size();
  if (n < 2) throw std::invalid_argument("pairwise_distances: insufficient points");

  // Per-row buffers keep the result independent of thread count.
  std::vector<std::vector<double>> rows(n - 1);
  parallel_for(n - 1, [&](std::size_t i) {
    const auto xi = p.point(i);
    auto& row = rows[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean_distance(xi, p.point(j));
      if (d <= trunc) row.push_back(d);
    }
  });

  std::vector<double> out;
  for (const auto& row : rows) out.insert(out.end(), row.begin(), row.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> pairwise_distances_serial(const PointPattern& p, double trunc) {
  if (!(trunc > 0.0)) throw std::invalid_argument("pairwise_distances: truncation must be positive");
  const std::size_t n = p.size();
  if (n < 2) throw std::invalid_argument("pairwise_distances: insufficient points");

  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto xi = p.point(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean_distance(xi, p.point(j));
      if (d <= trunc) out.push_back(d);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double pattern_intensity(const PointPattern& p) {
  const double vol = p.window.volume();
  if (!(vol > 0.0)) throw std::invalid_argument("pattern_intensity: window volume must be positive");
  return static_cast<double>(p.size()) / vol;
}

double sample_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("sample_quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * (static_cast<double>(values.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

std::map<std::string, PointPattern> split_by_mark(const PointPattern& p) {
  std::map<std::string, PointPattern> out;
  if (p.marks.empty()) {
    out.emplace("", p);
    return out;
  }
  std::map<std::string, std::vector<double>> coords;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto& c = coords[p.marks[i]];
    const auto pt = p.point(i);
    c.insert(c.end(), pt.begin(), pt.end());
  }
  for (auto& [mark, c] : coords) out.emplace(mark, PointPattern(std::move(c), p.window));
  return out;
}

}  // namespace palmfit
