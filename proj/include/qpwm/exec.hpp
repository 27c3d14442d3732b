#pragma once

namespace qpwm {

// Execution policy for the data-parallel kernels. Parallel uses OpenMP when
// the library was built with it and is bit-identical to Serial by
// construction: every parallel loop draws from per-index random streams and
// reductions run in a fixed order. Serial is kept as the reference
// implementation for testing and benchmarking.
enum class ExecMode { Serial, Parallel };

// Number of threads the Parallel mode may use (1 without OpenMP).
int max_threads() noexcept;

}  // namespace qpwm
