#include "palmfit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace palmfit {

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> start,
                             const NelderMeadOptions& options) {
  const std::size_t n = start.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");

  constexpr double alpha = 1.0;  // reflection
  constexpr double gamma = 2.0;  // expansion
  constexpr double rho = 0.5;    // contraction
  constexpr double sigma = 0.5;  // shrink

  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(start.begin(), start.end()));
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += options.initial_step;
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), candidate(n);

  auto sort_simplex = [&] {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  };

  NelderMeadResult result;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    sort_simplex();
    const std::size_t best = order[0];
    const std::size_t worst = order[n];
    const std::size_t second_worst = order[n - 1];

    const double spread = std::fabs(values[worst] - values[best]);
    if (std::isfinite(values[best]) && spread <= options.tolerance) {
      result.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k];
    }
    for (std::size_t k = 0; k < n; ++k) centroid[k] /= static_cast<double>(n);

    for (std::size_t k = 0; k < n; ++k)
      candidate[k] = centroid[k] + alpha * (centroid[k] - simplex[worst][k]);
    const double f_reflect = f(candidate);

    if (f_reflect < values[best]) {
      std::vector<double> expanded(n);
      for (std::size_t k = 0; k < n; ++k)
        expanded[k] = centroid[k] + gamma * (candidate[k] - centroid[k]);
      const double f_expand = f(expanded);
      if (f_expand < f_reflect) {
        simplex[worst] = std::move(expanded);
        values[worst] = f_expand;
      } else {
        simplex[worst] = candidate;
        values[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < values[second_worst]) {
      simplex[worst] = candidate;
      values[worst] = f_reflect;
      continue;
    }

    const bool outside = f_reflect < values[worst];
    std::vector<double> contracted(n);
    if (outside) {
      for (std::size_t k = 0; k < n; ++k)
        contracted[k] = centroid[k] + rho * (candidate[k] - centroid[k]);
    } else {
      for (std::size_t k = 0; k < n; ++k)
        contracted[k] = centroid[k] + rho * (simplex[worst][k] - centroid[k]);
    }
    const double f_contract = f(contracted);
    if (f_contract < (outside ? f_reflect : values[worst])) {
      simplex[worst] = std::move(contracted);
      values[worst] = f_contract;
      continue;
    }

    sort_simplex();
    const std::size_t anchor = order[0];
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == anchor) continue;
      for (std::size_t k = 0; k < n; ++k)
        simplex[i][k] = simplex[anchor][k] + sigma * (simplex[i][k] - simplex[anchor][k]);
      values[i] = f(simplex[i]);
    }
  }

  sort_simplex();
  result.x = simplex[order[0]];
  result.value = values[order[0]];
  result.iterations = iter;
  return result;
}

}  // namespace palmfit
