// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/util/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hei::util {

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HEINFER_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void parallel_for(size_t count,
                  const std::function<void(size_t, size_t)>& fn,
                  unsigned threads) {
  if (count == 0) return;
  unsigned workers = resolve_thread_count(threads);
  if (workers > count) workers = static_cast<unsigned>(count);
  if (workers <= 1 || count < 2) {
    fn(0, count);
    return;
  }
  size_t block = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  // First worker exception wins and is rethrown on the calling thread.
  std::exception_ptr err;
  std::mutex err_mu;
  for (unsigned w = 0; w < workers; ++w) {
    size_t begin = static_cast<size_t>(w) * block;
    if (begin >= count) break;
    size_t end = begin + block < count ? begin + block : count;
    pool.emplace_back([&fn, &err, &err_mu, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace hei::util
