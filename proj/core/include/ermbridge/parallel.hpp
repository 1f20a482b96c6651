// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace ermbridge {

// Number of worker threads used by parallel_for. Reads ERMBRIDGE_THREADS
// once; defaults to the hardware concurrency, capped at 16.
int worker_count();

// Runs fn(begin, end) over a contiguous partition of [0, n). Results must
// not depend on the partition: each index writes its own output slot.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace ermbridge
