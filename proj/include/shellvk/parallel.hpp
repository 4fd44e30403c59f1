#ifndef SHELLVK_PARALLEL_HPP
#define SHELLVK_PARALLEL_HPP

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstddef>
#include <vector>

namespace shellvk {

/// Execution policy for the element-loop kernels. Serial is the reference
/// implementation; Parallel runs the per-element work under OpenMP and then
/// gathers in element order, so both paths produce bit-identical results.
enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_num_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

/// Evaluates kernel(e) for e in [0, n) into per-element slots, then scatters
/// sequentially in element order via gather(e). The scatter order (and hence
/// the floating-point accumulation order) is identical for both policies.
template <class Kernel, class Gather>
void for_each_element(Exec exec, std::size_t n, Kernel&& kernel, Gather&& gather) {
    if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long e = 0; e < static_cast<long long>(n); ++e)
            kernel(static_cast<std::size_t>(e));
    } else {
        for (std::size_t e = 0; e < n; ++e) kernel(e);
    }
    for (std::size_t e = 0; e < n; ++e) gather(e);
}

/// Plain parallel loop without a gather phase, for kernels writing to
/// disjoint output slots.
template <class Kernel>
void parallel_for(Exec exec, std::size_t n, Kernel&& kernel) {
    if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long e = 0; e < static_cast<long long>(n); ++e)
            kernel(static_cast<std::size_t>(e));
    } else {
        for (std::size_t e = 0; e < n; ++e) kernel(e);
    }
}

/// Deterministic sum: per-slot values are accumulated in index order.
inline double ordered_sum(const std::vector<double>& slots) {
    double acc = 0.0;
    for (double v : slots) acc += v;
    return acc;
}

} // namespace shellvk

#endif
