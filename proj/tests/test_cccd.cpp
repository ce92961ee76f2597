#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "palmfit/cccd.hpp"

using namespace palmfit;

TEST_SUITE_BEGIN("cccd");

namespace {
PointPattern make(const std::vector<double>& coords, const Window& w) {
  return PointPattern(coords, w);
}
}  // namespace

TEST_CASE("single pair of points") {
  const Window w({-2.0, -2.0}, {2.0, 2.0});
  const auto summary = cccd_radii(make({0.0, 0.0}, w), make({1.0, 0.0}, w));
  CHECK(summary.radii_x == std::vector<double>{1.0});
  CHECK(summary.radii_y == std::vector<double>{1.0});
  CHECK(summary.suggested_t == doctest::Approx(1.0));
}

TEST_CASE("grid against a corner point") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  std::vector<double> grid;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      grid.push_back(i / 3.0);
      grid.push_back(j / 3.0);
    }
  const PointPattern x(grid, w);
  const PointPattern y({1.0, 1.0}, w);
  const auto summary = cccd_radii(x, y);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double dx = i / 3.0 - 1.0, dy = j / 3.0 - 1.0;
      CHECK(summary.radii_x[i * 4 + j] ==
            doctest::Approx(std::sqrt(dx * dx + dy * dy)).epsilon(1e-14));
    }
}

TEST_CASE("radii match a brute-force nearest-other-class search") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> xs, ys;
  for (int i = 0; i < 150; ++i) {
    xs.push_back(unif(gen));
    xs.push_back(unif(gen));
  }
  for (int i = 0; i < 90; ++i) {
    ys.push_back(unif(gen));
    ys.push_back(unif(gen));
  }
  const PointPattern x(xs, w), y(ys, w);
  const auto summary = cccd_radii(x, y);
  const auto serial = cccd_radii_serial(x, y);
  CHECK(summary.radii_x == serial.radii_x);
  CHECK(summary.radii_y == serial.radii_y);
  CHECK(summary.suggested_t == serial.suggested_t);

  for (std::size_t i = 0; i < x.size(); ++i) {
    double best = 1e300;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double dx = xs[2 * i] - ys[2 * j], dy = xs[2 * i + 1] - ys[2 * j + 1];
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    CHECK(summary.radii_x[i] == best);
  }
}

TEST_CASE("suggested truncation is invariant under class swap") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> xs, ys;
  for (int i = 0; i < 80; ++i) {
    xs.push_back(unif(gen));
    xs.push_back(unif(gen));
  }
  for (int i = 0; i < 40; ++i) {
    ys.push_back(unif(gen));
    ys.push_back(unif(gen));
  }
  const PointPattern x(xs, w), y(ys, w);
  CHECK(cccd_radii(x, y).suggested_t == cccd_radii(y, x).suggested_t);
}

TEST_CASE("suggested truncation is rigid-motion invariant and scales linearly") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  std::mt19937_64 gen(14);
  std::uniform_real_distribution<double> unif(0.2, 0.8);
  std::vector<double> xs, ys;
  for (int i = 0; i < 60; ++i) {
    xs.push_back(unif(gen));
    xs.push_back(unif(gen));
  }
  for (int i = 0; i < 60; ++i) {
    ys.push_back(unif(gen));
    ys.push_back(unif(gen));
  }
  const PointPattern x(xs, w), y(ys, w);
  const double base = cccd_radii(x, y).suggested_t;

  // Translation + rotation by 30 degrees about the origin.
  const double cth = std::cos(M_PI / 6.0), sth = std::sin(M_PI / 6.0);
  const Window big({-5.0, -5.0}, {5.0, 5.0});
  const auto transform = [&](const std::vector<double>& src, double shift) {
    std::vector<double> out;
    for (std::size_t i = 0; i < src.size(); i += 2) {
      out.push_back(cth * src[i] - sth * src[i + 1] + shift);
      out.push_back(sth * src[i] + cth * src[i + 1] + shift);
    }
    return out;
  };
  const PointPattern xr(transform(xs, 1.5), big), yr(transform(ys, 1.5), big);
  CHECK(cccd_radii(xr, yr).suggested_t == doctest::Approx(base).epsilon(1e-12));

  // Uniform scaling by 7.
  std::vector<double> xs7 = xs, ys7 = ys;
  for (double& v : xs7) v *= 7.0;
  for (double& v : ys7) v *= 7.0;
  const Window w7({0.0, 0.0}, {7.0, 7.0});
  CHECK(cccd_radii(PointPattern(xs7, w7), PointPattern(ys7, w7)).suggested_t ==
        doctest::Approx(7.0 * base).epsilon(1e-12));
}

TEST_CASE("quantile knob and error paths") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  const PointPattern x({0.1, 0.1, 0.2, 0.2, 0.3, 0.3}, w);
  const PointPattern y({0.9, 0.9}, w);
  const auto lo = cccd_radii(x, y, 0.1);
  const auto hi = cccd_radii(x, y, 1.0);
  CHECK(lo.suggested_t < hi.suggested_t);
  CHECK_THROWS_WITH_AS(cccd_radii(PointPattern({}, w), y),
                       "CCCD requires two nonempty classes", std::invalid_argument);
  CHECK_THROWS_AS(cccd_radii(x, y, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(cccd_radii(x, y, 1.5), std::invalid_argument);
}

TEST_SUITE_END();
