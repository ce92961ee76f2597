#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "palmfit/gof.hpp"
#include "palmfit/sim.hpp"

using namespace palmfit;

TEST_SUITE_BEGIN("gof");

namespace {
const Window kUnit({0.0, 0.0}, {1.0, 1.0});

std::vector<double> linspace_radii(double rmax, int count) {
  std::vector<double> radii(count);
  for (int i = 0; i < count; ++i) radii[i] = rmax * (i + 1) / count;
  return radii;
}
}  // namespace

TEST_CASE("single point at the window center saturates F") {
  const PointPattern p({0.5, 0.5}, kUnit);
  const EsfCurve curve = empty_space_function(p, {0.05, 0.45}, 64);
  // The eroded region is [0.45, 0.55]^2, never farther than ~0.071 from the
  // data point.
  CHECK(curve.F[1] == 1.0);
  CHECK(curve.F[0] < 1.0);
  CHECK(curve.F[0] > 0.0);
}

TEST_CASE("F vanishes as r goes to zero") {
  RngStream rng(1);
  const PointPattern p = simulate_poisson(100.0, kUnit, rng);
  const EsfCurve curve = empty_space_function(p, {1e-7, 0.01, 0.1}, 64);
  CHECK(curve.F[0] == 0.0);
  CHECK(curve.F[2] <= 1.0);
}

TEST_CASE("F is monotone nondecreasing in r") {
  RngStream rng(2);
  const PointPattern p = simulate_thomas(ThomasParams{7, 8, 0.05}, kUnit, -1.0, rng);
  const EsfCurve curve = empty_space_function(p, linspace_radii(0.2, 25), 64);
  for (std::size_t i = 1; i < curve.F.size(); ++i) CHECK(curve.F[i] >= curve.F[i - 1]);
}

TEST_CASE("erosion rejects radii too large for the window") {
  const PointPattern p({0.5, 0.5}, kUnit);
  CHECK_THROWS_WITH_AS(empty_space_function(p, {0.5}, 32),
                       "empty_space_function: window too small for erosion; reduce max radius",
                       std::invalid_argument);
  CHECK_THROWS_AS(empty_space_function(p, {}, 32), std::invalid_argument);
  CHECK_THROWS_AS(empty_space_function(p, {0.2, 0.1}, 32), std::invalid_argument);
  CHECK_THROWS_AS(empty_space_function(PointPattern({}, kUnit), {0.1}, 32),
                  std::invalid_argument);
}

TEST_CASE("parallel nearest-distance grid equals the serial reference") {
  RngStream rng(3);
  const PointPattern p = simulate_poisson(200.0, kUnit, rng);
  const Window region({0.2, 0.2}, {0.8, 0.8});
  CHECK(nearest_distance_grid(p, region, 37) ==
        nearest_distance_grid_serial(p, region, 37));
}

TEST_CASE("poisson empty space function brackets the analytic contact distribution") {
  const double lambda = 300.0;
  const auto radii = linspace_radii(0.08, 16);
  RngStream rng(4);
  const int reps = 200;
  std::vector<std::vector<double>> curves;
  for (int s = 0; s < reps; ++s) {
    RngStream local = rng.substream(s);
    const PointPattern p = simulate_poisson(lambda, kUnit, local);
    if (p.size() == 0) continue;
    curves.push_back(empty_space_function(p, radii, 64).F);
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    std::vector<double> column;
    for (const auto& c : curves) column.push_back(c[i]);
    const double lo = sample_quantile(column, 0.025);
    const double hi = sample_quantile(column, 0.975);
    const double analytic = 1.0 - std::exp(-lambda * M_PI * radii[i] * radii[i]);
    CHECK(analytic >= lo - 1e-12);
    CHECK(analytic <= hi + 1e-12);
  }
}

TEST_CASE("doubling the grid changes F by less than 0.01") {
  RngStream rng(5);
  const PointPattern p = simulate_poisson(500.0, kUnit, rng);
  const auto radii = linspace_radii(0.1, 20);
  const EsfCurve coarse = empty_space_function(p, radii, 64);
  const EsfCurve fine = empty_space_function(p, radii, 128);
  double sup = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i)
    sup = std::max(sup, std::fabs(coarse.F[i] - fine.F[i]));
  CHECK(sup < 0.01);
}

TEST_CASE("envelope bounds are ordered, even with two simulations") {
  RngStream rng(6);
  const PointPattern p = simulate_poisson(150.0, kUnit, rng);
  const auto radii = linspace_radii(0.08, 10);
  RngStream env_rng(7);
  const GofEnvelope env =
      gof_envelope(p, PoissonParams{150.0}, 2, radii, env_rng, 48);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    CHECK(env.lo.F[i] <= env.hi.F[i]);
    CHECK(env.lo.F[i] >= 0.0);
    CHECK(env.hi.F[i] <= 1.0);
  }
  CHECK(env.observed.kind == EsfCurve::Kind::observed);
  CHECK(env.lo.kind == EsfCurve::Kind::simulated);
  RngStream bad(8);
  CHECK_THROWS_AS(gof_envelope(p, PoissonParams{150.0}, 1, radii, bad, 48),
                  std::invalid_argument);
}

TEST_CASE("envelope is deterministic in the stream key") {
  RngStream rng(9);
  const PointPattern p = simulate_thomas(ThomasParams{7, 8, 0.05}, kUnit, -1.0, rng);
  const auto radii = linspace_radii(0.08, 8);
  RngStream a(10), b(10);
  const GofEnvelope e1 = gof_envelope(p, ThomasParams{7, 8, 0.05}, 19, radii, a, 48);
  const GofEnvelope e2 = gof_envelope(p, ThomasParams{7, 8, 0.05}, 19, radii, b, 48);
  CHECK(e1.lo.F == e2.lo.F);
  CHECK(e1.hi.F == e2.hi.F);
  CHECK(e1.inside_fraction == e2.inside_fraction);
}

TEST_CASE("self-simulated patterns sit inside their own envelope") {
  const ThomasParams truth{7, 8, 0.05};
  const auto radii = linspace_radii(0.1, 20);
  int good = 0;
  const int trials = 5;
  for (int s = 0; s < trials; ++s) {
    RngStream data_rng(100 + s);
    const PointPattern p = simulate_thomas(truth, kUnit, -1.0, data_rng);
    RngStream env_rng(200 + s);
    const GofEnvelope env = gof_envelope(p, truth, 99, radii, env_rng, 64);
    good += (env.inside_fraction >= 0.9);
  }
  CHECK(good >= 4);
}

TEST_CASE("poisson data against a strongly clustered fit is flagged") {
  const auto radii = linspace_radii(0.1, 20);
  int flagged = 0;
  const int trials = 3;
  for (int s = 0; s < trials; ++s) {
    RngStream data_rng(300 + s);
    const PointPattern p = simulate_poisson(300.0, kUnit, data_rng);
    RngStream env_rng(400 + s);
    const GofEnvelope env =
        gof_envelope(p, ThomasParams{7, 43, 0.02}, 99, radii, env_rng, 64);
    flagged += (env.inside_fraction < 0.5);
  }
  CHECK(flagged == trials);
}

TEST_SUITE_END();
