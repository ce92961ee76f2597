#include "palmfit/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace palmfit {

namespace {
int g_max_threads = 0;
}

void set_max_threads(int n) { g_max_threads = n < 0 ? 0 : n; }

int max_threads() { return g_max_threads; }

namespace detail {

void parallel_for_impl(std::size_t n, const void* ctx,
                       void (*body)(const void*, std::size_t)) {
#ifdef _OPENMP
  const int requested = g_max_threads;
  if (requested == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(ctx, i);
    return;
  }
  if (requested > 0) {
#pragma omp parallel for schedule(static) num_threads(requested)
    for (std::size_t i = 0; i < n; ++i) body(ctx, i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) body(ctx, i);
  }
#else
  for (std::size_t i = 0; i < n; ++i) body(ctx, i);
#endif
}

}  // namespace detail
}  // namespace palmfit
