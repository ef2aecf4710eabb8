// Monte Carlo walk sampling on a realised graph.
//
// One step from half-edge x: land uniformly on a neighbour of eta(x), i.e. a
// half-edge of eta(x)'s vertex other than eta(x) itself.  O(1) per step via
// the contiguous per-vertex layout.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nbrw/graph.hpp"
#include "nbrw/rng.hpp"

namespace nbrw::walk {

using model::PairedGraph;
using model::half_edge;

inline half_edge step(const PairedGraph& g, half_edge x, Rng& rng) {
    const half_edge m = g.eta[static_cast<std::size_t>(x)];
    const half_edge v = g.owner[static_cast<std::size_t>(m)];
    const half_edge lo = g.vertex_first[static_cast<std::size_t>(v)];
    const int deg = g.vertex_degree[static_cast<std::size_t>(v)] - 1;
    if (deg < 1) throw std::runtime_error("step: walk stuck on degree-1 vertex");
    const auto r = static_cast<half_edge>(rng.below(static_cast<std::uint64_t>(deg)));
    const half_edge y = lo + r;
    return y < m ? y : static_cast<half_edge>(y + 1);
}

// X_0 = x0, then `steps` non-backtracking moves; returns all steps+1 states.
inline std::vector<half_edge> sample_trajectory(const PairedGraph& g, half_edge x0,
                                                std::int64_t steps, std::uint64_t seed) {
    if (x0 < 0 || x0 >= g.N) throw std::invalid_argument("sample_trajectory: start out of range");
    Rng rng(seed, Stream::trajectory);
    std::vector<half_edge> path;
    path.reserve(static_cast<std::size_t>(steps) + 1);
    half_edge x = x0;
    path.push_back(x);
    for (std::int64_t s = 0; s < steps; ++s) path.push_back(x = step(g, x, rng));
    return path;
}

struct OccupancyCurve {
    int start_side = 0;
    std::int64_t n_samples = 0;
    std::vector<double> freq;  // per t: fraction of trajectories in start_side
    std::vector<double> se;    // binomial standard error sqrt(f(1-f)/n)

    void finalize(const std::vector<std::int64_t>& counts) {
        freq.resize(counts.size());
        se.resize(counts.size());
        const auto n = static_cast<double>(n_samples);
        for (std::size_t t = 0; t < counts.size(); ++t) {
            const double f = static_cast<double>(counts[t]) / n;
            freq[t] = f;
            se[t] = std::sqrt(f * (1.0 - f) / n);
        }
    }
};

// Fraction of n_samples trajectories from the fixed start x0 that sit in x0's
// community at each time 0..t_max.  Each trajectory gets its own substream.
inline OccupancyCurve community_occupancy(const PairedGraph& g, half_edge x0, std::int64_t t_max,
                                          std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples <= 0) throw std::invalid_argument("community_occupancy: n_samples <= 0");
    OccupancyCurve curve;
    curve.start_side = g.community(x0);
    curve.n_samples = n_samples;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(t_max) + 1, 0);
    for (std::int64_t i = 0; i < n_samples; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Stream::trajectory),
                            static_cast<std::uint64_t>(i)));
        half_edge x = x0;
        if (g.community(x) == curve.start_side) ++counts[0];
        for (std::int64_t t = 1; t <= t_max; ++t) {
            x = step(g, x, rng);
            if (g.community(x) == curve.start_side) ++counts[static_cast<std::size_t>(t)];
        }
    }
    curve.finalize(counts);
    return curve;
}

// Same curve but with X_0 redrawn uniformly inside the start community for
// every trajectory: the empirical counterpart of a stationary-in-community
// start.
inline OccupancyCurve community_occupancy_stationary(const PairedGraph& g, int side,
                                                     std::int64_t t_max, std::int64_t n_samples,
                                                     std::uint64_t seed) {
    if (n_samples <= 0) throw std::invalid_argument("community_occupancy_stationary: n_samples <= 0");
    OccupancyCurve curve;
    curve.start_side = side;
    curve.n_samples = n_samples;
    const std::int64_t lo = side == 0 ? 0 : g.N0;
    const std::int64_t size = side == 0 ? g.N0 : g.N1;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(t_max) + 1, 0);
    for (std::int64_t i = 0; i < n_samples; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Stream::trajectory),
                            static_cast<std::uint64_t>(i)));
        auto x = static_cast<half_edge>(lo + static_cast<std::int64_t>(
                                                 rng.below(static_cast<std::uint64_t>(size))));
        ++counts[0];
        for (std::int64_t t = 1; t <= t_max; ++t) {
            x = step(g, x, rng);
            if (g.community(x) == side) ++counts[static_cast<std::size_t>(t)];
        }
    }
    curve.finalize(counts);
    return curve;
}

}  // namespace nbrw::walk
