#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "qmean/ledger.hpp"
#include "qmean/rng.hpp"

namespace qmean {

// Runs seeded, independent trials. Trial k always sees Rng(seed, k) and a
// fresh ledger, so results are byte-identical regardless of thread count or
// scheduling; outputs are collected in trial order.
template <typename T>
std::vector<T> run_trials(
    std::uint64_t seed, int trials,
    const std::function<T(int trial, Rng& rng, QueryLedger& ledger)>& body,
    int threads = 0) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  std::vector<T> results(static_cast<std::size_t>(trials));
  if (threads == 1 || trials <= 1) {
    for (int t = 0; t < trials; ++t) {
      Rng rng(seed, static_cast<std::uint64_t>(t));
      QueryLedger ledger;
      results[static_cast<std::size_t>(t)] = body(t, rng, ledger);
    }
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      for (int t = w; t < trials; t += threads) {
        Rng rng(seed, static_cast<std::uint64_t>(t));
        QueryLedger ledger;
        results[static_cast<std::size_t>(t)] = body(t, rng, ledger);
      }
    });
  }
  for (auto& th : pool) th.join();
  return results;
}

}  // namespace qmean
