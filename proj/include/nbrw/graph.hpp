// Paired half-edge graph: the realised configuration-model multigraph.
//
// Half-edge layout: community 0's vertices first, half-edges contiguous per
// vertex, so ids [0, N0) are community 0 and [N0, N) community 1.  The pairing
// eta is a fixed-point-free involution with exactly p pairs crossing the
// community boundary.
//
// Generation phases, each on its own RNG substream:
//   1. pick p outgoing half-edges per community (Fisher-Yates prefix),
//   2. pair the remaining internal half-edges inside each community
//      (full shuffle, consecutive entries become pairs),
//   3. match the two outgoing sets (side-0 sorted, side-1 shuffled, paired
//      positionally), giving a uniform bipartite matching.

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nbrw/rng.hpp"
#include "nbrw/spec.hpp"

namespace nbrw::model {

using half_edge = std::int32_t;

struct PairedGraph {
    CommunitySpec spec;
    std::uint64_t seed = 0;
    std::int64_t N0 = 0, N1 = 0, N = 0;
    std::vector<half_edge> eta;           // pairing involution
    std::vector<half_edge> owner;         // half-edge -> vertex id
    std::vector<half_edge> vertex_first;  // vertex -> first half-edge id
    std::vector<int> vertex_degree;       // vertex -> d(v)
    std::int64_t vertices_0 = 0;          // vertices in community 0

    int community(half_edge x) const { return x < N0 ? 0 : 1; }
    bool crossing(half_edge x) const { return community(x) != community(eta[x]); }
    // walk degree of a half-edge: d(owner) - 1
    int walk_degree(half_edge x) const { return vertex_degree[owner[x]] - 1; }
    std::int64_t vertex_count() const { return static_cast<std::int64_t>(vertex_degree.size()); }
};

namespace detail {

inline void build_layout(PairedGraph& g) {
    g.N0 = g.spec.half_edges(0);
    g.N1 = g.spec.half_edges(1);
    g.N = g.N0 + g.N1;
    g.vertices_0 = static_cast<std::int64_t>(g.spec.degrees_0.size());
    g.vertex_degree.clear();
    g.vertex_degree.reserve(g.spec.degrees_0.size() + g.spec.degrees_1.size());
    g.vertex_degree.insert(g.vertex_degree.end(), g.spec.degrees_0.begin(), g.spec.degrees_0.end());
    g.vertex_degree.insert(g.vertex_degree.end(), g.spec.degrees_1.begin(), g.spec.degrees_1.end());
    g.vertex_first.assign(g.vertex_degree.size() + 1, 0);
    g.owner.assign(static_cast<std::size_t>(g.N), 0);
    half_edge next = 0;
    for (std::size_t v = 0; v < g.vertex_degree.size(); ++v) {
        g.vertex_first[v] = next;
        for (int k = 0; k < g.vertex_degree[v]; ++k) g.owner[static_cast<std::size_t>(next++)] = static_cast<half_edge>(v);
    }
    g.vertex_first[g.vertex_degree.size()] = next;
}

}  // namespace detail

inline PairedGraph generate_graph(const CommunitySpec& spec, std::uint64_t seed) {
    const ValidationReport rep = validate_spec(spec);
    if (!rep.model_valid) {
        std::string msg = "generate_graph: invalid spec:";
        for (const auto& e : rep.errors) msg += " " + e + ";";
        throw std::invalid_argument(msg);
    }
    PairedGraph g;
    g.spec = spec;
    g.seed = seed;
    detail::build_layout(g);
    g.eta.assign(static_cast<std::size_t>(g.N), -1);

    std::vector<half_edge> outgoing[2];
    for (int side = 0; side < 2; ++side) {
        const std::int64_t lo = side == 0 ? 0 : g.N0;
        const std::int64_t hi = side == 0 ? g.N0 : g.N;
        std::vector<half_edge> ids(static_cast<std::size_t>(hi - lo));
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<half_edge>(lo + static_cast<std::int64_t>(i));

        Rng pick(seed, side == 0 ? Stream::outgoing_h0 : Stream::outgoing_h1);
        pick.partial_shuffle(ids, static_cast<std::size_t>(spec.p));
        outgoing[side].assign(ids.begin(), ids.begin() + spec.p);

        std::vector<half_edge> internal(ids.begin() + spec.p, ids.end());
        std::sort(internal.begin(), internal.end());
        Rng pair_rng(seed, side == 0 ? Stream::internal_h0 : Stream::internal_h1);
        pair_rng.shuffle(internal);
        for (std::size_t i = 0; i + 1 < internal.size(); i += 2) {
            g.eta[static_cast<std::size_t>(internal[i])] = internal[i + 1];
            g.eta[static_cast<std::size_t>(internal[i + 1])] = internal[i];
        }
    }

    std::sort(outgoing[0].begin(), outgoing[0].end());
    std::sort(outgoing[1].begin(), outgoing[1].end());
    Rng cross(seed, Stream::crossing);
    cross.shuffle(outgoing[1]);
    for (std::size_t i = 0; i < outgoing[0].size(); ++i) {
        g.eta[static_cast<std::size_t>(outgoing[0][i])] = outgoing[1][i];
        g.eta[static_cast<std::size_t>(outgoing[1][i])] = outgoing[0][i];
    }
    return g;
}

// Wrap an explicit pairing (tests, hand-built fixtures).  Checks that eta is a
// fixed-point-free involution consistent with the layout; crossing count is
// whatever the pairing implies, spec.p is updated to match.
inline PairedGraph graph_from_pairing(const CommunitySpec& spec, std::vector<half_edge> eta) {
    PairedGraph g;
    g.spec = spec;
    detail::build_layout(g);
    if (static_cast<std::int64_t>(eta.size()) != g.N)
        throw std::invalid_argument("graph_from_pairing: eta size mismatch");
    std::int64_t crossing = 0;
    for (std::int64_t x = 0; x < g.N; ++x) {
        const half_edge y = eta[static_cast<std::size_t>(x)];
        if (y < 0 || y >= g.N || y == x || eta[static_cast<std::size_t>(y)] != x)
            throw std::invalid_argument("graph_from_pairing: eta is not a fixed-point-free involution");
        if ((x < g.N0) != (y < g.N0)) ++crossing;
    }
    g.eta = std::move(eta);
    g.spec.p = crossing / 2;
    return g;
}

}  // namespace nbrw::model
