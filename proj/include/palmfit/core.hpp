#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace palmfit {

// Axis-aligned rectangular observation window in d >= 1 dimensions.
struct Window {
  std::vector<double> lower;
  std::vector<double> upper;

  Window() = default;
  Window(std::vector<double> lo, std::vector<double> hi);

  int dim() const { return static_cast<int>(lower.size()); }
  double side(int i) const { return upper[i] - lower[i]; }
  double min_side() const;
  double volume() const;
  bool contains(std::span<const double> x) const;
};

// Locations of events inside a window, stored row-major (n x dim).
// marks is either empty or one class label per point.
struct PointPattern {
  std::vector<double> coords;
  Window window;
  std::vector<std::string> marks;

  PointPattern() = default;
  PointPattern(std::vector<double> coords, Window window,
               std::vector<std::string> marks = {});

  int dim() const { return window.dim(); }
  std::size_t size() const {
    return window.dim() == 0 ? 0 : coords.size() / window.dim();
  }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * window.dim(), static_cast<std::size_t>(window.dim())};
  }
};

struct PoissonParams {
  double intensity = 0.0;  // daughters per unit volume
};

struct ThomasParams {
  double parent_intensity = 0.0;  // parents per unit volume
  double mean_offspring = 0.0;    // expected daughters per parent
  double dispersion = 0.0;        // Gaussian sd of offsets, per coordinate
};

struct MaternParams {
  double parent_intensity = 0.0;
  double mean_offspring = 0.0;
  double radius = 0.0;  // daughters uniform in the ball of this radius
};

struct VoidParams {
  double parent_intensity = 0.0;
  double radius = 0.0;              // expunging radius around each parent
  double daughter_intensity = 0.0;  // background daughters per unit volume
};

using ProcessParams =
    std::variant<PoissonParams, ThomasParams, MaternParams, VoidParams>;

// All fields strictly positive; throws std::invalid_argument otherwise.
void validate(const ProcessParams& params);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

// All unordered pair distances <= trunc, ascending. Parallel over points;
// identical output for any worker-pool size. Throws on fewer than 2 points.
std::vector<double> pairwise_distances(const PointPattern& p, double trunc);

// Plain double loop, kept as the reference the parallel kernel is tested
// and benchmarked against.
std::vector<double> pairwise_distances_serial(const PointPattern& p, double trunc);

// Empirical intensity n / |W|.
double pattern_intensity(const PointPattern& p);

// Splits a marked pattern into per-class unmarked patterns; fitting is
// single-class. Unmarked input comes back under the key "".
std::map<std::string, PointPattern> split_by_mark(const PointPattern& p);

// Linear-interpolation sample quantile on a copy of the data.
double sample_quantile(std::vector<double> values, double q);

}  // namespace palmfit
