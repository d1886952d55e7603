#pragma once

namespace kspp::threading {

/// Set the worker count used by the parallel kernels. k <= 1 forces the
/// serial paths. Results are identical for every thread count: parallel
/// kernels only write disjoint output slots or reduce over a fixed chunk
/// partition.
void set_threads(int k);

int threads();

/// True when parallel kernel dispatch is active (threads() > 1 and OpenMP
/// was compiled in).
bool parallel_enabled();

}  // namespace kspp::threading
