// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace hei::util {

// Worker-thread count resolution order: explicit argument > HEINFER_THREADS
// environment variable > hardware concurrency.
unsigned resolve_thread_count(unsigned requested = 0);

// Runs fn(begin, end) over [0, count) split into contiguous blocks, one per
// worker. Blocks are fixed by (count, threads) alone, so any reduction that
// combines per-block results in block order is deterministic regardless of
// scheduling. Runs inline when threads == 1 or count is small.
void parallel_for(size_t count,
                  const std::function<void(size_t, size_t)>& fn,
                  unsigned threads = 0);

}  // namespace hei::util
