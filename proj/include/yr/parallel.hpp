#pragma once

#include <cstddef>
#include <functional>

namespace yr {

/// Number of worker threads used by the ensemble and grid kernels. Defaults to
/// 1; `YR_DETERMINISTIC=1` in the environment pins it to 1 regardless.
int num_threads();
void set_num_threads(int n);

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot; results are then independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

} // namespace yr
