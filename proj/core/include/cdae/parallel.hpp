#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace cdae {

/// Thread count from an explicit request, else CDAE_THREADS, else the
/// hardware count (at least 1).
std::size_t resolve_threads(std::optional<std::size_t> requested = std::nullopt);

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Each index
/// runs exactly once; callers must write to disjoint outputs. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace cdae
