#pragma once

namespace cylbill {

/// Execution policy for the data-parallel kernels. Every kernel keeps a
/// serial path; results are identical under both policies.
enum class Exec { serial, parallel };

/// Threads the parallel kernels may use: omp_get_max_threads() capped by
/// the CYLBILL_THREADS environment variable when set.
int thread_budget();

}  // namespace cylbill
