// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef AFEM_PARALLEL_HPP
#define AFEM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace afem
{

// Worker count: AFEM_THREADS when set to a positive integer, otherwise the
// hardware concurrency.
inline int thread_count()
{
  static int n = []
  {
    if (const char* env = std::getenv("AFEM_THREADS"))
    {
      int v = std::atoi(env);
      if (v >= 1)
        return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
  }();
  return n;
}

// Runs fn(i) for i in [0,n). fn must write only to slots owned by index i and
// must not throw; results are then independent of the thread count.
template <class Fn>
void parallel_for(int n, Fn&& fn)
{
  const int workers = std::min(thread_count(), std::max(n, 1));
  if (workers <= 1 || n < 128)
  {
    for (int i = 0; i < n; i++)
      fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto work = [&]
  {
    for (;;)
    {
      int s = next.fetch_add(64, std::memory_order_relaxed);
      if (s >= n)
        break;
      int e = std::min(n, s + 64);
      for (int i = s; i < e; i++)
        fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; w++)
    pool.emplace_back(work);
  work();
  for (auto& th : pool)
    th.join();
}

} // namespace afem

#endif // AFEM_PARALLEL_HPP
