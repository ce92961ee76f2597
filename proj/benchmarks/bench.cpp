// Serial reference vs OpenMP kernel timings. Every kernel pair must agree
// bit for bit; the table reports the speedup at the current pool size.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "palmfit/cccd.hpp"
#include "palmfit/core.hpp"
#include "palmfit/gof.hpp"
#include "palmfit/parallel.hpp"
#include "palmfit/rng.hpp"
#include "palmfit/sim.hpp"

using namespace palmfit;

namespace {

double seconds(const std::function<void()>& body, int repeats) {
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) body();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count() / repeats;
}

void report(const char* kernel, double serial, double parallel, bool identical) {
  std::printf("%-24s %10.1f ms %10.1f ms %7.2fx   %s\n", kernel, serial * 1e3,
              parallel * 1e3, serial / parallel, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) set_max_threads(std::stoi(argv[1]));
  const Window unit({0.0, 0.0}, {1.0, 1.0});
  RngStream rng(1);

  std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    const PointPattern p = simulate_poisson(6000.0, unit, rng);
    const double t = 0.05;
    std::vector<double> serial_out, parallel_out;
    const double ts = seconds([&] { serial_out = pairwise_distances_serial(p, t); }, 3);
    const double tp = seconds([&] { parallel_out = pairwise_distances(p, t); }, 3);
    report("pairwise_distances", ts, tp, serial_out == parallel_out);
  }

  {
    const PointPattern p = simulate_poisson(2000.0, unit, rng);
    const Window region({0.1, 0.1}, {0.9, 0.9});
    std::vector<double> serial_out, parallel_out;
    const double ts =
        seconds([&] { serial_out = nearest_distance_grid_serial(p, region, 256); }, 3);
    const double tp =
        seconds([&] { parallel_out = nearest_distance_grid(p, region, 256); }, 3);
    report("nearest_distance_grid", ts, tp, serial_out == parallel_out);
  }

  {
    const PointPattern x = simulate_poisson(3000.0, unit, rng);
    const PointPattern y = simulate_poisson(3000.0, unit, rng);
    CccdSummary serial_out, parallel_out;
    const double ts = seconds([&] { serial_out = cccd_radii_serial(x, y); }, 3);
    const double tp = seconds([&] { parallel_out = cccd_radii(x, y); }, 3);
    report("cccd_radii", ts, tp,
           serial_out.radii_x == parallel_out.radii_x &&
               serial_out.radii_y == parallel_out.radii_y &&
               serial_out.suggested_t == parallel_out.suggested_t);
  }

  return 0;
}
