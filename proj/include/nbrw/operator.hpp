// Non-backtracking transition operator on half-edges.
//
// P(x, y) = 1 / deg(eta(x)) whenever y shares eta(x)'s vertex and y != eta(x),
// with deg(z) = d(owner(z)) - 1.  Rows are never materialised for evolution;
// one step of v -> vP is computed in O(N) through per-vertex sums:
//
//   u[z]   = v[eta(z)] / deg(z)
//   out[y] = sum of u over y's vertex - u[y]
//
// which is exactly sum_{z ~ y, z != y} v[eta(z)] / deg(z) = (vP)(y).

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nbrw/graph.hpp"

namespace nbrw::walk {

using model::PairedGraph;
using model::half_edge;

struct NbrwOperator {
    std::int64_t N = 0, N0 = 0;
    std::vector<half_edge> eta;
    std::vector<half_edge> owner;
    std::vector<half_edge> vertex_first;
    std::vector<double> inv_deg;  // per half-edge z: 1 / deg(z)

    int community(half_edge x) const { return x < N0 ? 0 : 1; }

    int row_degree(half_edge x) const {
        const half_edge m = eta[static_cast<std::size_t>(x)];
        const half_edge v = owner[static_cast<std::size_t>(m)];
        return static_cast<int>(vertex_first[static_cast<std::size_t>(v) + 1] -
                                vertex_first[static_cast<std::size_t>(v)]) - 1;
    }

    // Materialised row, for checks and small-scale oracles.
    std::vector<std::pair<half_edge, double>> row(half_edge x) const {
        const half_edge m = eta[static_cast<std::size_t>(x)];
        const half_edge v = owner[static_cast<std::size_t>(m)];
        const half_edge lo = vertex_first[static_cast<std::size_t>(v)];
        const half_edge hi = vertex_first[static_cast<std::size_t>(v) + 1];
        std::vector<std::pair<half_edge, double>> out;
        out.reserve(static_cast<std::size_t>(hi - lo - 1));
        const double w = inv_deg[static_cast<std::size_t>(m)];
        for (half_edge y = lo; y < hi; ++y)
            if (y != m) out.emplace_back(y, w);
        return out;
    }

    // One step v -> vP.  scratch must have size N.
    void apply(const std::vector<double>& in, std::vector<double>& out,
               std::vector<double>& scratch) const {
        const auto n = static_cast<std::size_t>(N);
        for (std::size_t z = 0; z < n; ++z)
            scratch[z] = in[static_cast<std::size_t>(eta[z])] * inv_deg[z];
        const std::size_t n_vertices = vertex_first.size() - 1;
        for (std::size_t v = 0; v < n_vertices; ++v) {
            const auto lo = static_cast<std::size_t>(vertex_first[v]);
            const auto hi = static_cast<std::size_t>(vertex_first[v + 1]);
            double s = 0.0;
            for (std::size_t z = lo; z < hi; ++z) s += scratch[z];
            for (std::size_t z = lo; z < hi; ++z) out[z] = s - scratch[z];
        }
    }
};

inline NbrwOperator build_operator(const PairedGraph& g) {
    NbrwOperator op;
    op.N = g.N;
    op.N0 = g.N0;
    op.eta = g.eta;
    op.owner = g.owner;
    op.vertex_first = g.vertex_first;
    op.inv_deg.assign(static_cast<std::size_t>(g.N), 0.0);
    for (std::int64_t x = 0; x < g.N; ++x) {
        const int deg = g.walk_degree(static_cast<half_edge>(x));
        if (deg < 1)
            throw std::invalid_argument("build_operator: vertex of degree < 2 makes the walk stuck");
        op.inv_deg[static_cast<std::size_t>(x)] = 1.0 / static_cast<double>(deg);
    }
    return op;
}

// Probability vector over half-edges.  evolve() renormalises every 64 steps
// and checks the accumulated float drift stays below 1e-9.
class DistVector {
  public:
    static DistVector point_mass(std::int64_t N, half_edge x) {
        DistVector v;
        v.p_.assign(static_cast<std::size_t>(N), 0.0);
        v.p_[static_cast<std::size_t>(x)] = 1.0;
        return v;
    }
    static DistVector uniform(std::int64_t N) {
        DistVector v;
        v.p_.assign(static_cast<std::size_t>(N), 1.0 / static_cast<double>(N));
        return v;
    }

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const std::vector<double>& data() const { return p_; }
    std::vector<double>& data() { return p_; }

    double sum() const {
        double s = 0.0;
        for (double x : p_) s += x;
        return s;
    }

    void renormalize() {
        const double s = sum();
        if (std::abs(s - 1.0) > 1e-9)
            throw std::runtime_error("DistVector: drift " + std::to_string(s - 1.0) +
                                     " exceeds 1e-9 before renormalization");
        for (double& x : p_)
            if (x < 0.0) throw std::runtime_error("DistVector: negative entry");
        const double inv = 1.0 / s;
        for (double& x : p_) x *= inv;
    }

  private:
    std::vector<double> p_;
};

inline void evolve(const NbrwOperator& op, DistVector& v, std::int64_t steps,
                   std::int64_t renorm_every = 64) {
    std::vector<double> next(v.size()), scratch(v.size());
    std::int64_t since_renorm = 0;
    for (std::int64_t s = 0; s < steps; ++s) {
        op.apply(v.data(), next, scratch);
        v.data().swap(next);
        if (++since_renorm == renorm_every) {
            v.renormalize();
            since_renorm = 0;
        }
    }
}

// Total variation distance to the uniform distribution: sum of (1/N - v_y)+.
inline double tv_to_uniform(const DistVector& v) {
    const double u = 1.0 / static_cast<double>(v.size());
    double s = 0.0;
    for (std::size_t y = 0; y < v.size(); ++y) {
        const double gap = u - v[y];
        if (gap > 0.0) s += gap;
    }
    return s;
}

// General half-L1 total variation between two distributions.
inline double tv_distance(const DistVector& a, const DistVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("tv_distance: size mismatch");
    double s = 0.0;
    for (std::size_t y = 0; y < a.size(); ++y) s += std::abs(a[y] - b[y]);
    return 0.5 * s;
}

}  // namespace nbrw::walk
