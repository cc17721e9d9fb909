#pragma once

#include <functional>

namespace spb {

/// Number of worker threads used by assembly, estimation and norm loops.
/// Results never depend on this value: workers fill per-item slots that are
/// reduced afterwards in index order.
void set_num_threads(int n);
int num_threads();

/// Calls fn(begin, end) on contiguous chunks of [0, n).
void parallel_for(int n, const std::function<void(int, int)>& fn);

} // namespace spb
