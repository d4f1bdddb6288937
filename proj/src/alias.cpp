#include "bps/alias.hpp"

#include <cmath>
#include <stdexcept>

namespace bps {

AliasTable::AliasTable(const std::vector<double>& weights) {
    const int n = static_cast<int>(weights.size());
    threshold_.assign(n, 1.0);
    alias_.assign(n, 0);
    total_ = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("invalid alias weight");
        total_ += w;
    }
    if (total_ <= 0.0) return;

    std::vector<double> scaled(n);
    std::vector<int> small, large;
    for (int i = 0; i < n; ++i) {
        scaled[i] = weights[i] * n / total_;
        (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
        const int s = small.back();
        small.pop_back();
        const int l = large.back();
        large.pop_back();
        threshold_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (int i : small) threshold_[i] = 1.0;
    for (int i : large) threshold_[i] = 1.0;
}

int AliasTable::sample(RngStream& rng) const {
    if (total_ <= 0.0 || threshold_.empty())
        throw std::logic_error("sampling from an empty distribution");
    const int n = static_cast<int>(threshold_.size());
    const int slot = std::min(n - 1, static_cast<int>(rng.uniform() * n));
    return rng.uniform() < threshold_[slot] ? slot : alias_[slot];
}

}  // namespace bps
