#pragma once

// Thread-count plumbing for the OpenMP kernels. Builds without OpenMP fall
// back to one thread and identical results.

namespace bq {

/// Threads the parallel kernels may use: omp_get_max_threads(), capped by the
/// BULLETIN_QUEUES_THREADS environment variable when it holds a positive int.
int parallel_threads();

/// True when the library was compiled with OpenMP.
bool openmp_enabled() noexcept;

}  // namespace bq
