// Structural diagnostics of a realised pairing: community conductance and the
// fraction of half-edges whose neighbourhood is locally tree-like.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "nbrw/operator.hpp"

namespace nbrw::walk {

// Phi(H_side) = sum_{x in side} P(x, other side) / N_side under the uniform
// stationary law.  Computed from operator rows; equals p / N_side exactly up
// to float summation because precisely the p crossing half-edges have full
// rows landing in the other community.
inline double conductance(const NbrwOperator& op, int side) {
    const std::int64_t lo = side == 0 ? 0 : op.N0;
    const std::int64_t hi = side == 0 ? op.N0 : op.N;
    double mass = 0.0;
    for (std::int64_t x = lo; x < hi; ++x) {
        const half_edge m = op.eta[static_cast<std::size_t>(x)];
        if ((m < op.N0) == (side == 0)) continue;  // internal: whole row stays put
        const half_edge v = op.owner[static_cast<std::size_t>(m)];
        const half_edge b = op.vertex_first[static_cast<std::size_t>(v)];
        const half_edge e = op.vertex_first[static_cast<std::size_t>(v) + 1];
        const double w = op.inv_deg[static_cast<std::size_t>(m)];
        for (half_edge y = b; y < e; ++y)
            if (y != m && ((y < op.N0) != (side == 0))) mass += w;
    }
    return mass / static_cast<double>(hi - lo);
}

// Tree test for the induced ball of the given radius around a vertex: BFS over
// the multigraph, then compare induced edge count against vertex count - 1.
// Multi-edges and self-loops inside the ball count as extra edges, so any of
// them disqualifies the ball.
inline bool tree_ball(const model::PairedGraph& g, model::half_edge center_vertex, int radius) {
    std::unordered_map<model::half_edge, int> dist;
    dist.reserve(64);
    std::vector<model::half_edge> frontier{center_vertex}, next;
    dist[center_vertex] = 0;
    for (int depth = 0; depth < radius && !frontier.empty(); ++depth) {
        next.clear();
        for (const model::half_edge v : frontier) {
            const model::half_edge b = g.vertex_first[static_cast<std::size_t>(v)];
            const model::half_edge e = g.vertex_first[static_cast<std::size_t>(v) + 1];
            for (model::half_edge z = b; z < e; ++z) {
                const model::half_edge w = g.owner[static_cast<std::size_t>(g.eta[static_cast<std::size_t>(z)])];
                if (dist.emplace(w, depth + 1).second) next.push_back(w);
            }
        }
        frontier.swap(next);
    }
    std::int64_t incidences = 0;  // half-edges of ball vertices whose partner stays in the ball
    for (const auto& [v, d] : dist) {
        const model::half_edge b = g.vertex_first[static_cast<std::size_t>(v)];
        const model::half_edge e = g.vertex_first[static_cast<std::size_t>(v) + 1];
        for (model::half_edge z = b; z < e; ++z) {
            const model::half_edge w = g.owner[static_cast<std::size_t>(g.eta[static_cast<std::size_t>(z)])];
            if (dist.count(w)) ++incidences;
        }
    }
    const std::int64_t edges = incidences / 2;
    return edges == static_cast<std::int64_t>(dist.size()) - 1;
}

// Observation radius R = ceil(log N / (6 log Delta)).
inline int ball_radius(const model::PairedGraph& g) {
    int delta = 0;
    for (int d : g.vertex_degree) delta = std::max(delta, d);
    if (delta < 2) throw std::invalid_argument("ball_radius: max degree < 2");
    const double r = std::log(static_cast<double>(g.N)) / (6.0 * std::log(static_cast<double>(delta)));
    return static_cast<int>(std::ceil(r));
}

struct RootReport {
    int radius = 0;
    double fraction = 0.0;  // half-edge weighted share of tree balls
};

// A half-edge is a root when the radius-R ball around its vertex is a tree;
// all half-edges of one vertex share that status, so the scan is per vertex
// weighted by degree.
inline RootReport root_fraction(const model::PairedGraph& g) {
    RootReport rep;
    rep.radius = ball_radius(g);
    std::int64_t rooted = 0;
    const auto n_vertices = static_cast<model::half_edge>(g.vertex_count());
    for (model::half_edge v = 0; v < n_vertices; ++v)
        if (tree_ball(g, v, rep.radius)) rooted += g.vertex_degree[static_cast<std::size_t>(v)];
    rep.fraction = static_cast<double>(rooted) / static_cast<double>(g.N);
    return rep;
}

}  // namespace nbrw::walk
