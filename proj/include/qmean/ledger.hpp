#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace qmean {

struct BudgetExhausted : std::runtime_error {
  BudgetExhausted() : std::runtime_error("query budget exhausted") {}
};

// Monotone counter of oracle uses: one direct draw costs 1, one application
// of the phased unitary (or a controlled version) costs kUnitaryCost.
// Classical rewrites of the code (shift, scale, truncate, ...) are free.
class QueryLedger {
 public:
  static constexpr std::uint64_t kUnitaryCost = 4;

  QueryLedger() = default;
  explicit QueryLedger(std::uint64_t budget) : budget_(budget) {}

  void charge(std::uint64_t uses) {
    if (uses > budget_ - count_) throw BudgetExhausted();
    count_ += uses;
  }

  std::uint64_t count() const { return count_; }
  std::uint64_t budget() const { return budget_; }
  std::uint64_t remaining() const { return budget_ - count_; }

 private:
  std::uint64_t count_ = 0;
  std::uint64_t budget_ = std::numeric_limits<std::uint64_t>::max();
};

}  // namespace qmean
