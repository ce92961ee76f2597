#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "palmfit/core.hpp"
#include "palmfit/rng.hpp"

using namespace palmfit;

TEST_SUITE_BEGIN("core");

namespace {

PointPattern uniform_pattern(int n, const Window& w, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> coords;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < w.dim(); ++k) {
      std::uniform_real_distribution<double> unif(w.lower[k], w.upper[k]);
      coords.push_back(unif(gen));
    }
  return PointPattern(std::move(coords), w);
}

}  // namespace

TEST_CASE("window invariants") {
  const Window w({0.0, 0.0}, {2.0, 5.0});
  CHECK(w.dim() == 2);
  CHECK(w.volume() == doctest::Approx(10.0));
  CHECK(w.min_side() == doctest::Approx(2.0));
  CHECK_THROWS_AS(Window({0.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Window({0.0, 0.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Window({}, {}), std::invalid_argument);
}

TEST_CASE("pattern rejects points outside the window") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  CHECK_THROWS_AS(PointPattern({0.5, 1.5}, w), std::invalid_argument);
  CHECK_THROWS_AS(PointPattern({0.5}, w), std::invalid_argument);
  CHECK_THROWS_AS(PointPattern({0.5, 0.5}, w, {"a", "b"}), std::invalid_argument);
  const PointPattern ok({0.5, 0.5, 1.0, 1.0}, w);
  CHECK(ok.size() == 2);
}

TEST_CASE("process params must be strictly positive") {
  CHECK_NOTHROW(validate(ThomasParams{7, 8, 0.05}));
  CHECK_THROWS_AS(validate(ThomasParams{7, 0, 0.05}), std::invalid_argument);
  CHECK_THROWS_AS(validate(VoidParams{10, -0.075, 300}), std::invalid_argument);
  CHECK_THROWS_AS(validate(PoissonParams{0}), std::invalid_argument);
}

TEST_CASE("pairwise distances on collinear points") {
  const Window w({0.0}, {10.0});
  const PointPattern p({0.0, 1.0, 2.0}, w);
  CHECK(pairwise_distances(p, 10.0) == std::vector<double>{1.0, 1.0, 2.0});
  CHECK(pairwise_distances(p, 1.5) == std::vector<double>{1.0, 1.0});
}

TEST_CASE("pairwise distances error paths") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  const PointPattern one({0.5, 0.5}, w);
  CHECK_THROWS_WITH_AS(pairwise_distances(one, 1.0),
                       "pairwise_distances: insufficient points", std::invalid_argument);
  const PointPattern two({0.1, 0.1, 0.9, 0.9}, w);
  CHECK_THROWS_AS(pairwise_distances(two, 0.0), std::invalid_argument);
}

TEST_CASE("pairwise distances match a brute-force enumeration exactly") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  const PointPattern p = uniform_pattern(200, w, 42);
  const double t = 0.1;

  std::vector<double> expected;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double dx = p.coords[2 * i] - p.coords[2 * j];
      const double dy = p.coords[2 * i + 1] - p.coords[2 * j + 1];
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d <= t) expected.push_back(d);
    }
  std::sort(expected.begin(), expected.end());

  CHECK(pairwise_distances(p, t) == expected);
  CHECK(pairwise_distances_serial(p, t) == expected);
}

TEST_CASE("pairwise distances full count and permutation invariance") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  const PointPattern p = uniform_pattern(60, w, 7);
  const auto all = pairwise_distances(p, 1e9);
  CHECK(all.size() == 60 * 59 / 2);

  std::mt19937_64 gen(3);
  std::vector<std::size_t> perm(p.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), gen);
  std::vector<double> shuffled;
  for (std::size_t i : perm) {
    shuffled.push_back(p.coords[2 * i]);
    shuffled.push_back(p.coords[2 * i + 1]);
  }
  const PointPattern q(std::move(shuffled), w);
  CHECK(pairwise_distances(q, 0.3) == pairwise_distances(p, 0.3));
}

TEST_CASE("distances invariant under joint translation") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  const PointPattern p = uniform_pattern(50, w, 9);
  const Window w2({5.0, -3.0}, {6.0, -2.0});
  std::vector<double> moved = p.coords;
  for (std::size_t i = 0; i < moved.size(); i += 2) {
    moved[i] += 5.0;
    moved[i + 1] -= 3.0;
  }
  const PointPattern q(std::move(moved), w2);
  const auto a = pairwise_distances(p, 0.25);
  const auto b = pairwise_distances(q, 0.25);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("pattern intensity") {
  const Window unit({0.0, 0.0}, {1.0, 1.0});
  CHECK(pattern_intensity(uniform_pattern(300, unit, 1)) == doctest::Approx(300.0));
  CHECK(pattern_intensity(PointPattern({}, unit)) == 0.0);
  const Window rect({0.0, 0.0}, {2.0, 5.0});
  CHECK(pattern_intensity(uniform_pattern(50, rect, 2)) == doctest::Approx(5.0));
}

TEST_CASE("split by mark") {
  const Window w({0.0, 0.0}, {1.0, 1.0});
  const PointPattern p({0.1, 0.1, 0.2, 0.2, 0.3, 0.3}, w, {"tumour", "stroma", "tumour"});
  const auto classes = split_by_mark(p);
  REQUIRE(classes.size() == 2);
  CHECK(classes.at("tumour").size() == 2);
  CHECK(classes.at("stroma").size() == 1);
  CHECK(classes.at("tumour").marks.empty());

  const PointPattern unmarked({0.1, 0.1}, w);
  const auto single = split_by_mark(unmarked);
  REQUIRE(single.size() == 1);
  CHECK(single.count(""));
}

TEST_CASE("sample quantile") {
  CHECK(sample_quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == doctest::Approx(2.5));
  CHECK(sample_quantile({3.0, 1.0, 2.0}, 0.0) == 1.0);
  CHECK(sample_quantile({3.0, 1.0, 2.0}, 1.0) == 3.0);
  CHECK(sample_quantile({5.0}, 0.3) == 5.0);
  CHECK_THROWS_AS(sample_quantile({}, 0.5), std::invalid_argument);
}

TEST_CASE("rng determinism and substream independence") {
  RngStream a(123, 5);
  RngStream b(123, 5);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(123, 6);
  int same = 0;
  RngStream a2(123, 5);
  for (int i = 0; i < 64; ++i) same += (a2.next_u64() == c.next_u64());
  CHECK(same == 0);

  RngStream parent(9);
  RngStream s1 = parent.substream(1);
  RngStream s2 = parent.substream(2);
  RngStream s1again = parent.substream(1);
  CHECK(s1.next_u64() == s1again.next_u64());
  CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("rng distribution moments") {
  RngStream rng(77);
  const int n = 200000;
  std::vector<double> unif(n), norm(n);
  for (int i = 0; i < n; ++i) unif[i] = rng.uniform();
  for (int i = 0; i < n; ++i) norm[i] = rng.normal(2.0, 3.0);
  CHECK(oracles::mean(unif) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(oracles::variance(unif) == doctest::Approx(1.0 / 12.0).epsilon(0.03));
  CHECK(oracles::mean(norm) == doctest::Approx(2.0).epsilon(0.02));
  CHECK(oracles::variance(norm) == doctest::Approx(9.0).epsilon(0.03));

  std::vector<double> pois(20000);
  for (auto& v : pois) v = static_cast<double>(rng.poisson(7.5));
  CHECK(oracles::mean(pois) == doctest::Approx(7.5).epsilon(0.02));
  CHECK(oracles::variance(pois) == doctest::Approx(7.5).epsilon(0.05));

  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_index(7) < 7);
  CHECK_THROWS_AS(rng.uniform_index(0), std::invalid_argument);
}

TEST_SUITE_END();
