// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace atomdemix {

/// Worker count: ATOMDEMIX_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Indices are
/// handed out dynamically; the first exception thrown is rethrown after all
/// workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace atomdemix
