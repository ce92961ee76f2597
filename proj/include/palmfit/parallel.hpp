#pragma once

#include <cstddef>
#include <type_traits>

namespace palmfit {

// Worker-pool size for the OpenMP kernels. 0 means "library default"
// (OMP_NUM_THREADS / hardware). Results never depend on this value: every
// parallel loop writes to a slot indexed by iteration and reductions are
// performed serially afterwards, so pool sizes 1 and N are byte-identical.
void set_max_threads(int n);
int max_threads();

namespace detail {
void parallel_for_impl(std::size_t n, const void* ctx,
                       void (*body)(const void*, std::size_t));
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
  using Fn = std::remove_reference_t<F>;
  detail::parallel_for_impl(n, &body, [](const void* ctx, std::size_t i) {
    (*static_cast<const Fn*>(ctx))(i);
  });
}

}  // namespace palmfit
