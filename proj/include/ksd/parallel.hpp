#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ksd/linalg.hpp"

namespace ksd {

/// Worker count: explicit request, else KSD_THREADS, else hardware threads.
inline unsigned resolve_threads(unsigned requested = 0) {
  unsigned n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("KSD_THREADS")) {
      try {
        n = static_cast<unsigned>(std::stoul(env));
      } catch (const std::exception&) {
        n = 0;
      }
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Runs fn(i) for i in [0, count) over contiguous chunks. Results must be
/// written to per-index slots so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(Index count, unsigned threads, Fn&& fn) {
  const Index workers = std::min<Index>(std::max(1u, threads), std::max<Index>(count, 1));
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const Index chunk = (count + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const Index end = std::min(count, (w + 1) * chunk);
        for (Index i = w * chunk; i < end; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Independent generator for (seed, stream); streams never share state.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

/// `count` distinct indices from [0, population), partial Fisher-Yates.
inline std::vector<Index> sample_without_replacement(Index population, Index count, std::mt19937_64& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(population));
  for (Index i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
  const Index take = std::min(count, population);
  for (Index i = 0; i < take; ++i) {
    std::uniform_int_distribution<Index> pick(i, population - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(take));
  return pool;
}

}  // namespace ksd
