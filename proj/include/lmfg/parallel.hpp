#pragma once

#include <functional>

namespace lmfg {

/// Worker count: LMFG_THREADS when set to a positive integer, else 1.
int configured_threads();

/// Runs fn(chunk) for chunk = 0..chunks-1 on up to `threads` workers
/// (0 means configured_threads()). Exceptions are rethrown on the caller.
void parallel_chunks(int chunks, const std::function<void(int)>& fn, int threads = 0);

}  // namespace lmfg
