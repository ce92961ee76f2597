#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "palmfit/palm.hpp"
#include "palmfit/rng.hpp"
#include "palmfit/sim.hpp"
#include "palmfit/specfun.hpp"

using namespace palmfit;

TEST_SUITE_BEGIN("palm");

namespace {
// 2D lens area between circles of common radius R at center distance r.
double lens_area(double r, double R) {
  if (r >= 2.0 * R) return 0.0;
  return 2.0 * R * R * std::acos(r / (2.0 * R)) -
         0.5 * r * std::sqrt(4.0 * R * R - r * r);
}
}  // namespace

TEST_CASE("intersection volume endpoints and the classical lens formula") {
  for (int d : {1, 2, 3, 4}) {
    CHECK(intersection_volume(0.0, 0.8, d) ==
          doctest::Approx(sphere_volume(d, 0.8)).epsilon(1e-13));
    CHECK(intersection_volume(1.6, 0.8, d) == 0.0);
    CHECK(intersection_volume(5.0, 0.8, d) == 0.0);
  }
  CHECK(intersection_volume(1.0, 1.0, 2) ==
        doctest::Approx(2.0 * std::acos(0.5) - 0.5 * std::sqrt(3.0)).epsilon(1e-12));
  for (int k = 0; k <= 40; ++k) {
    const double r = 2.0 * 0.7 * k / 40.0;
    CHECK(intersection_volume(r, 0.7, 2) == doctest::Approx(lens_area(r, 0.7)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(intersection_volume(-0.1, 1.0, 2), std::domain_error);

  // Monotone nonincreasing in r.
  double prev = intersection_volume(0.0, 0.5, 3);
  for (int k = 1; k <= 30; ++k) {
    const double cur = intersection_volume(k / 30.0, 0.5, 3);
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
}

TEST_CASE("void palm boundary identities") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const VoidParams q{0.5 + 30.0 * unif(gen), 0.01 + 0.3 * unif(gen),
                       10.0 + 500.0 * unif(gen)};
    CHECK(palm_void(0.0, q, 2) == doctest::Approx(q.daughter_intensity).epsilon(1e-10));
    const double floor2 = q.daughter_intensity *
                          std::exp(-q.parent_intensity * M_PI * q.radius * q.radius);
    for (double r : {2.0 * q.radius, 2.5 * q.radius, 10.0 * q.radius})
      CHECK(palm_void(r, q, 2) == doctest::Approx(floor2).epsilon(1e-10));
    // d = 3 floor uses the ball volume.
    const double floor3 =
        q.daughter_intensity * std::exp(-q.parent_intensity * sphere_volume(3, q.radius));
    CHECK(palm_void(2.0 * q.radius, q, 3) == doctest::Approx(floor3).epsilon(1e-10));
    CHECK(palm_void(0.0, q, 3) == doctest::Approx(q.daughter_intensity).epsilon(1e-10));
  }
}

TEST_CASE("void palm piecewise continuity at 2R and monotone decay") {
  const VoidParams q{10, 0.075, 300};
  for (int d : {2, 3}) {
    const double left = palm_void(2.0 * q.radius * (1.0 - 1e-12), q, d);
    const double right = palm_void(2.0 * q.radius, q, d);
    CHECK(left == doctest::Approx(right).epsilon(1e-10));
    double prev = palm_void(0.0, q, d);
    for (int k = 1; k <= 64; ++k) {
      const double cur = palm_void(2.0 * q.radius * k / 64.0, q, d);
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("void palm mid-domain value via the safety-probability composition") {
  const VoidParams q{10, 0.075, 300};
  for (int d : {2, 3}) {
    const double ball = sphere_volume(d, q.radius);
    const double expected =
        q.daughter_intensity *
        std::exp(-q.parent_intensity * (ball - intersection_volume(q.radius, q.radius, d)));
    CHECK(palm_void(q.radius, q, d) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("void palm 2D fast path agrees with the continued-fraction route") {
  const VoidParams q{10, 0.075, 300};
  for (int k = 0; k < 200; ++k) {
    const double r = 2.0 * q.radius * k / 199.0;
    const double half = r / (2.0 * q.radius);
    const double via_cf =
        r >= 2.0 * q.radius
            ? q.daughter_intensity * std::exp(-q.parent_intensity * M_PI * q.radius * q.radius)
            : q.daughter_intensity *
                  std::exp(-q.parent_intensity * M_PI * q.radius * q.radius *
                           (1.0 - reg_inc_beta(1.0 - half * half, 1.5, 0.5)));
    CHECK(palm_void(r, q, 2) == doctest::Approx(via_cf).epsilon(1e-13));
  }
}

TEST_CASE("thomas palm values and asymptote") {
  const ThomasParams q{7, 8, 0.05};
  CHECK(palm_thomas(0.0, q) ==
        doctest::Approx(56.0 + 8.0 / (4.0 * M_PI * 0.0025)).epsilon(1e-12));
  CHECK(palm_thomas(100.0, q) == doctest::Approx(56.0).epsilon(1e-12));
  // Decays monotonically to D nu, never below.
  double prev = palm_thomas(0.0, q);
  for (int k = 1; k <= 50; ++k) {
    const double cur = palm_thomas(0.5 * k / 50.0, q);
    CHECK(cur >= 56.0);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("thomas palm equals D nu + nu f_y(r)/(2 pi r)") {
  const ThomasParams q{7, 8, 0.05};
  for (double r : {0.01, 0.05, 0.11, 0.3}) {
    const double pdf =
        r * std::exp(-r * r / (4.0 * q.dispersion * q.dispersion)) /
        (2.0 * q.dispersion * q.dispersion);
    const double expected = q.parent_intensity * q.mean_offspring +
                            q.mean_offspring * pdf / (2.0 * M_PI * r);
    CHECK(palm_thomas(r, q) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("thomas palm excess is log-quadratic") {
  const ThomasParams q{3, 5, 0.04};
  const double base = q.parent_intensity * q.mean_offspring;
  // log(excess) at three abscissae determines a quadratic; a fourth point
  // must fall on it exactly.
  const double r1 = 0.01, r2 = 0.05, r3 = 0.09, r4 = 0.07;
  const auto logex = [&](double r) { return std::log(palm_thomas(r, q) - base); };
  // Lagrange interpolation of the quadratic through (r1..r3) at r4.
  const double l1 = (r4 - r2) * (r4 - r3) / ((r1 - r2) * (r1 - r3));
  const double l2 = (r4 - r1) * (r4 - r3) / ((r2 - r1) * (r2 - r3));
  const double l3 = (r4 - r1) * (r4 - r2) / ((r3 - r1) * (r3 - r2));
  const double predicted = l1 * logex(r1) + l2 * logex(r2) + l3 * logex(r3);
  CHECK(logex(r4) == doctest::Approx(predicted).epsilon(1e-9));
}

TEST_CASE("matern sibling pdf normalises to one") {
  for (double radius : {0.05, 1.0, 3.0})
    for (int d : {2, 3}) {
      const double total = oracles::adaptive_quad(
          [&](double r) { return matern_sibling_pdf(r, radius, d); }, 0.0, 2.0 * radius,
          1e-11);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("matern sibling pdf: hypergeometric vs integral representation") {
  for (int d : {2, 3}) {
    for (double radius : {0.05, 0.7}) {
      for (int k = 1; k < 200; ++k) {
        const double r = 2.0 * radius * k / 200.0;
        const double via_hyp = matern_sibling_pdf(r, radius, d);
        const double via_int = oracles::ball_distance_pdf_quadrature(r, radius, d);
        const double via_closed = oracles::ball_distance_pdf_closed(r, radius, d);
        CHECK(via_hyp == doctest::Approx(via_int).epsilon(1e-9));
        CHECK(via_hyp == doctest::Approx(via_closed).epsilon(1e-9));
      }
    }
  }
  CHECK(matern_sibling_pdf(2.0, 1.0, 2) == 0.0);
  CHECK(matern_sibling_pdf(3.0, 1.0, 2) == 0.0);
}

TEST_CASE("matern sibling pdf matches monte-carlo ball pair distances") {
  std::mt19937_64 gen(99);
  for (int d : {2, 3}) {
    const double radius = 0.6;
    std::vector<double> sample(20000);
    for (auto& v : sample) v = oracles::sample_ball_pair_distance(gen, radius, d);
    const double stat = oracles::ks_statistic(
        sample, [&](double t) { return matern_sibling_cdf(t, radius, d); });
    CHECK(stat < oracles::ks_critical_001(sample.size()));
  }
}

TEST_CASE("matern sibling cdf matches quadrature of the pdf") {
  for (int d : {2, 3}) {
    for (double radius : {0.05, 1.0}) {
      for (double frac : {0.2, 0.5, 0.9, 1.0}) {
        const double t = 2.0 * radius * frac;
        const double expected = oracles::ball_distance_cdf(t, radius, d);
        CHECK(matern_sibling_cdf(t, radius, d) == doctest::Approx(expected).epsilon(1e-8));
      }
      CHECK(matern_sibling_cdf(3.0 * radius, radius, d) == 1.0);
      CHECK(matern_sibling_cdf(0.0, radius, d) == 0.0);
    }
  }
}

TEST_CASE("matern palm: support bound, zero limit and cluster comparison") {
  const MaternParams q{7, 8, 0.05};
  const double base = q.parent_intensity * q.mean_offspring;
  CHECK(palm_matern(2.0 * q.radius, q, 2) == base);
  CHECK(palm_matern(1.0, q, 2) == base);

  // Cancelled form at 0 agrees with the raw ratio D nu + nu f_y/(2 pi r)
  // evaluated at r = 1e-9.
  const double raw = base + q.mean_offspring * matern_sibling_pdf(1e-9, q.radius, 2) /
                                (2.0 * M_PI * 1e-9);
  CHECK(palm_matern(0.0, q, 2) == doctest::Approx(raw).epsilon(1e-6));

  // Piecewise continuity at 2R.
  CHECK(palm_matern(2.0 * q.radius * (1.0 - 1e-12), q, 2) ==
        doctest::Approx(base).epsilon(1e-10));

  // With matched (D, nu, gamma) the Matern Palm starts above the Thomas one
  // and crosses below before 2R.
  const ThomasParams tq{7, 8, 0.05};
  CHECK(palm_matern(0.0, q, 2) > palm_thomas(0.0, tq));
  bool crossed = false;
  for (int k = 1; k <= 100; ++k) {
    const double r = 2.0 * q.radius * k / 100.0;
    if (palm_matern(r, q, 2) < palm_thomas(r, tq)) {
      crossed = true;
      break;
    }
  }
  CHECK(crossed);
}

TEST_CASE("fitted palm curves decay to the global point density") {
  const double far = 100.0;
  CHECK(palm_thomas(far, ThomasParams{7, 8, 0.05}) == doctest::Approx(56.0));
  CHECK(palm_matern(far, MaternParams{7, 8, 0.05}, 2) == doctest::Approx(56.0));
  const VoidParams vq{10, 0.075, 300};
  CHECK(palm_void(far, vq, 2) ==
        doctest::Approx(300.0 * std::exp(-10.0 * M_PI * 0.075 * 0.075)));
}

TEST_CASE("fitted palm curve wraps the model intensities") {
  const std::vector<double> radii{0.01, 0.05, 0.2};
  const VoidParams vq{10, 0.075, 300};
  const PalmCurve curve = fitted_palm_curve(vq, radii, 2);
  CHECK(curve.kind == PalmCurve::Kind::fitted);
  REQUIRE(curve.intensity.size() == 3);
  for (std::size_t i = 0; i < radii.size(); ++i)
    CHECK(curve.intensity[i] == palm_void(radii[i], vq, 2));
  const PalmCurve flat = fitted_palm_curve(PoissonParams{42.0}, radii, 2);
  for (double v : flat.intensity) CHECK(v == 42.0);
  CHECK_THROWS_AS(fitted_palm_curve(VoidParams{0, 1, 1}, radii, 2),
                  std::invalid_argument);
}

TEST_CASE("empirical palm on a two-point pattern") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  const PointPattern p({0.45, 0.5, 0.55, 0.5}, w);  // distance 0.1
  // Bins of width 0.05 over (0, 0.15]; the pair lands in [0.10, 0.15) and is
  // counted once per ordering.
  const PalmCurve curve = empirical_palm(p, 0.15, 3);
  const double shell = M_PI * (0.15 * 0.15 - 0.10 * 0.10);
  CHECK(curve.intensity[2] == doctest::Approx(2.0 / (2.0 * shell)).epsilon(1e-12));
  CHECK(curve.intensity[0] == 0.0);
  CHECK(curve.intensity[1] == 0.0);
  CHECK(curve.radii[2] == doctest::Approx(0.125));
}

TEST_CASE("empirical palm is flat for a homogeneous poisson pattern") {
  const Window w({0.0, 0.0}, {4.0, 4.0});
  RngStream rng(2024);
  const double lambda = 1000.0;
  const PointPattern p = simulate_poisson(lambda, w, rng);
  const double t = 0.3;
  const int bins = 10;
  const PalmCurve curve = empirical_palm(p, t, bins, EmpiricalCenters::interior);
  // The whole curve rides on the realised count, so flatness is judged
  // against the realisation's own neighbour density (n-1)/|W|, with the
  // nominal intensity checked through the count itself.
  const double n = static_cast<double>(p.size());
  CHECK(n / 16.0 == doctest::Approx(lambda).epsilon(4.0 * std::sqrt(lambda / 16.0) / lambda));
  const double level = (n - 1.0) / 16.0;
  const double interior = (4.0 - 2.0 * t) * (4.0 - 2.0 * t);
  const double centers = lambda * interior;
  for (int k = 0; k < bins; ++k) {
    const double lo = t * k / bins, hi = t * (k + 1) / bins;
    const double shell = M_PI * (hi * hi - lo * lo);
    // Pair-count noise, inflated for the double counting of interior pairs.
    const double se = std::sqrt(2.0 * lambda / (centers * shell));
    CHECK(curve.intensity[k] == doctest::Approx(level).epsilon(4.0 * se / lambda));
  }
}

TEST_CASE("empirical palm error paths") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  const PointPattern one({0.5, 0.5}, w);
  CHECK_THROWS_AS(empirical_palm(one, 0.1, 4), std::invalid_argument);
  const PointPattern two({0.1, 0.1, 0.9, 0.9}, w);
  CHECK_THROWS_AS(empirical_palm(two, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(empirical_palm(two, 0.6, 4, EmpiricalCenters::interior),
                  std::invalid_argument);
}

TEST_CASE("simulated thomas empirical curves bracket the analytic palm intensity") {
  const ThomasParams q{7, 8, 0.05};
  const Window w({0.0, 0.0}, {1.0, 1.0});
  const double t = 0.15;
  const int bins = 6;
  const int reps = 200;
  std::vector<std::vector<double>> curves;
  RngStream rng(31);
  for (int s = 0; s < reps; ++s) {
    RngStream local = rng.substream(s);
    const PointPattern p = simulate_thomas(q, w, -1.0, local);
    if (p.size() < 2) continue;
    try {
      curves.push_back(empirical_palm(p, t, bins, EmpiricalCenters::interior).intensity);
    } catch (const std::invalid_argument&) {
      continue;  // no interior centers this replicate
    }
  }
  REQUIRE(curves.size() > 150);
  for (int k = 0; k < bins; ++k) {
    std::vector<double> column;
    for (const auto& c : curves) column.push_back(c[k]);
    const double lo = sample_quantile(column, 0.025);
    const double hi = sample_quantile(column, 0.975);
    const double analytic = palm_thomas(t * (k + 0.5) / bins, q);
    CHECK(analytic >= lo);
    CHECK(analytic <= hi);
  }
}

TEST_SUITE_END();
