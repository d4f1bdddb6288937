#pragma once

#include <vector>

#include "bps/rng.hpp"

namespace bps {

// Walker alias structure: O(n) construction, O(1) draws from a fixed discrete
// distribution proportional to the given non-negative weights.
class AliasTable {
  public:
    AliasTable() = default;
    explicit AliasTable(const std::vector<double>& weights);

    // Throws std::logic_error when the distribution is empty (zero total mass).
    int sample(RngStream& rng) const;

    double total_weight() const { return total_; }
    int size() const { return static_cast<int>(threshold_.size()); }

  private:
    std::vector<double> threshold_;
    std::vector<int> alias_;
    double total_ = 0.0;
};

}  // namespace bps
