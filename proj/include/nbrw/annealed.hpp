// Walk over a pairing revealed on demand.
//
// Each trajectory draws a fresh uniform pairing restricted to the stubs it
// actually touches.  Sequential reveal of a uniform pairing is exchangeable,
// so the joint law of (pairing, walk) equals generating a complete graph per
// trajectory, at O(t) cost instead of O(N).  Reveal rule for an unmatched
// stub on side i: it crosses with probability p_rem / n_rem[i], and its mate
// is uniform over the other side's (crossing) or own side's (internal)
// remaining unmatched stubs.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "nbrw/graph.hpp"
#include "nbrw/rng.hpp"
#include "nbrw/trajectory.hpp"

namespace nbrw::walk {

// Stub layout (owners, vertex spans, community split) without any pairing.
inline model::PairedGraph layout_only(const model::CommunitySpec& spec) {
    model::PairedGraph g;
    g.spec = spec;
    model::detail::build_layout(g);
    return g;
}

class LazyPairing {
public:
    explicit LazyPairing(const model::PairedGraph& layout) : g_(&layout) { reset(); }

    void reset() {
        matched_.clear();
        n_rem_[0] = g_->N0;
        n_rem_[1] = g_->N1;
        p_rem_ = g_->spec.p;
    }

    // Mate of x under a uniform pairing consistent with all reveals so far.
    model::half_edge mate(model::half_edge x, Rng& rng) {
        if (auto it = matched_.find(x); it != matched_.end()) return it->second;
        const int side = g_->community(x);
        if (n_rem_[side] <= 0) throw std::logic_error("LazyPairing: side exhausted");
        const bool crossing = rng.below(static_cast<std::uint64_t>(n_rem_[side])) <
                              static_cast<std::uint64_t>(p_rem_);
        model::half_edge y;
        if (crossing) {
            y = draw_unmatched(1 - side, x, rng);
            --p_rem_;
        } else {
            y = draw_unmatched(side, x, rng);
        }
        matched_.emplace(x, y);
        matched_.emplace(y, x);
        --n_rem_[g_->community(x)];
        --n_rem_[g_->community(y)];
        return y;
    }

    // One walk step: uniform stub of the mate's vertex, skipping the mate.
    model::half_edge step(model::half_edge x, Rng& rng) {
        const model::half_edge m = mate(x, rng);
        const model::half_edge v = g_->owner[static_cast<std::size_t>(m)];
        const model::half_edge lo = g_->vertex_first[static_cast<std::size_t>(v)];
        const int deg = g_->vertex_degree[static_cast<std::size_t>(v)] - 1;
        if (deg <= 0) throw std::runtime_error("LazyPairing: walk stuck on a degree-1 vertex");
        const auto r = static_cast<model::half_edge>(rng.below(static_cast<std::uint64_t>(deg)));
        const model::half_edge y = lo + r;
        return y < m ? y : y + 1;
    }

    std::size_t revealed_pairs() const { return matched_.size() / 2; }

private:
    model::half_edge draw_unmatched(int side, model::half_edge exclude, Rng& rng) {
        const std::int64_t lo = side == 0 ? 0 : g_->N0;
        const std::int64_t size = side == 0 ? g_->N0 : g_->N1;
        for (;;) {
            const auto y = static_cast<model::half_edge>(
                lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(size))));
            if (y != exclude && !matched_.count(y)) return y;
        }
    }

    const model::PairedGraph* g_;
    std::unordered_map<model::half_edge, model::half_edge> matched_;
    std::int64_t n_rem_[2] = {0, 0};
    std::int64_t p_rem_ = 0;
};

// Occupancy of the start community with a fresh pairing per trajectory;
// X_0 uniform over the side's stubs.
inline OccupancyCurve annealed_occupancy(const model::PairedGraph& layout, int side,
                                         std::int64_t t_max, std::int64_t n_samples,
                                         std::uint64_t seed) {
    if (n_samples <= 0) throw std::invalid_argument("annealed_occupancy: n_samples <= 0");
    OccupancyCurve curve;
    curve.start_side = side;
    curve.n_samples = n_samples;
    const std::int64_t lo = side == 0 ? 0 : layout.N0;
    const std::int64_t size = side == 0 ? layout.N0 : layout.N1;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(t_max) + 1, 0);
    LazyPairing pairing(layout);
    for (std::int64_t i = 0; i < n_samples; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Stream::trajectory),
                            static_cast<std::uint64_t>(i)));
        pairing.reset();
        auto x = static_cast<model::half_edge>(
            lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(size))));
        ++counts[0];
        for (std::int64_t t = 1; t <= t_max; ++t) {
            x = pairing.step(x, rng);
            if (layout.community(x) == side) ++counts[static_cast<std::size_t>(t)];
        }
    }
    curve.finalize(counts);
    return curve;
}

}  // namespace nbrw::walk
