// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace urllc {

// Trials are split into fixed-size chunks independent of the thread count;
// chunk results are folded in chunk order, so output never depends on the
// schedule.
struct Parallelism {
  unsigned threads = 1;
  std::uint64_t chunk = 4096;
};

template <class Acc, class ChunkFn, class Merge>
Acc chunked_reduce(std::uint64_t count, const Parallelism& par, ChunkFn&& run_chunk,
                   Merge&& merge, Acc init = Acc{}) {
  const std::uint64_t chunk = std::max<std::uint64_t>(1, par.chunk);
  const std::uint64_t nchunks = (count + chunk - 1) / chunk;
  std::vector<Acc> parts(nchunks);
  auto work = [&](std::uint64_t c) {
    const std::uint64_t lo = c * chunk;
    parts[c] = run_chunk(lo, std::min(count, lo + chunk));
  };
  const unsigned nt =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, par.threads), nchunks));
  if (nt <= 1) {
    for (std::uint64_t c = 0; c < nchunks; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    for (unsigned t = 0; t < nt; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::uint64_t c = t; c < nchunks; c += nt) work(c);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  for (auto& p : parts) merge(init, p);
  return init;
}

}  // namespace urllc
