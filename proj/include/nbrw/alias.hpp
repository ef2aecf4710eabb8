// Walker alias table for O(1) sampling from a fixed discrete distribution.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nbrw/rng.hpp"

namespace nbrw::theory {

class AliasTable {
  public:
    AliasTable() = default;

    explicit AliasTable(const std::vector<double>& weights) {
        const std::size_t n = weights.size();
        if (n == 0) throw std::invalid_argument("AliasTable: empty weights");
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("AliasTable: negative weight");
            total += w;
        }
        if (total <= 0.0) throw std::invalid_argument("AliasTable: zero total weight");
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i)
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s = small.back();
            const std::uint32_t l = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (std::uint32_t i : large) prob_[i] = 1.0;
        for (std::uint32_t i : small) prob_[i] = 1.0;  // float leftovers
    }

    std::size_t size() const { return prob_.size(); }

    std::uint32_t sample(Rng& rng) const {
        const auto i = static_cast<std::uint32_t>(rng.below(prob_.size()));
        return rng.unit() < prob_[i] ? i : alias_[i];
    }

  private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

}  // namespace nbrw::theory
