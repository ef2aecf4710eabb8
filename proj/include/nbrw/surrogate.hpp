// Surrogate community chain: the walk reduced to (community, log-degree).
//
// From community i the next state crosses with probability alpha_i and lands
// uniformly over the target community's half-edges, so the log-degree draw
// follows that community's half-edge degree profile and the community process
// is a two-state Markov chain.  Occupancy from a community-i start has the
// closed form N_i/N + N_{1-i}/N * (1 - alpha)^s and spectral gap alpha.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nbrw/alias.hpp"
#include "nbrw/normal.hpp"
#include "nbrw/rng.hpp"
#include "nbrw/stats.hpp"

namespace nbrw::theory {

struct SurrogateChain {
    double alpha_c[2] = {0.0, 0.0};
    std::int64_t N_c[2] = {0, 0};
    // Distinct log-degree values per community with half-edge weights.
    std::vector<double> logdeg[2];
    AliasTable pick[2];
    SummaryStats stats;

    double alpha() const { return alpha_c[0] + alpha_c[1]; }
    std::int64_t N() const { return N_c[0] + N_c[1]; }

    static SurrogateChain from_spec(const model::CommunitySpec& spec) {
        SurrogateChain ch;
        ch.stats = compute_stats(spec);
        ch.alpha_c[0] = ch.stats.alpha0;
        ch.alpha_c[1] = ch.stats.alpha1;
        ch.N_c[0] = ch.stats.N0;
        ch.N_c[1] = ch.stats.N1;
        for (int side = 0; side < 2; ++side) {
            const auto& degrees = side == 0 ? spec.degrees_0 : spec.degrees_1;
            std::vector<std::int64_t> count;  // indexed by degree
            for (int d : degrees) {
                if (d >= static_cast<int>(count.size())) count.resize(static_cast<std::size_t>(d) + 1, 0);
                count[static_cast<std::size_t>(d)] += d;  // d half-edges carry log(d-1)
            }
            std::vector<double> weights;
            for (std::size_t d = 2; d < count.size(); ++d) {
                if (count[d] == 0) continue;
                ch.logdeg[side].push_back(std::log(static_cast<double>(d - 1)));
                weights.push_back(static_cast<double>(count[d]));
            }
            ch.pick[side] = AliasTable(weights);
        }
        return ch;
    }
};

// P(X*_s in the start community | start community = side), start distributed
// uniformly inside that community (the same value holds for any point start,
// the community process being Markov on two states).
inline double surrogate_occupancy_closed_form(const SurrogateChain& ch, int side, std::int64_t s) {
    if (s < 0) throw std::invalid_argument("surrogate_occupancy_closed_form: negative time");
    const double n_self = static_cast<double>(ch.N_c[side]);
    const double n_other = static_cast<double>(ch.N_c[1 - side]);
    const double n = n_self + n_other;
    return n_self / n + n_other / n * std::pow(1.0 - ch.alpha(), static_cast<double>(s));
}

struct SurrogateSample {
    int start_side = 0;
    std::int64_t n = 0;
    std::int64_t t = 0;
    std::vector<double> sum_logdeg;               // per trajectory: S_t over steps 1..t
    std::vector<std::int64_t> count_in_start;     // per time 0..t
};

// One trajectory as explicit (community, log-degree) pairs; step 0 is the
// start with no degree draw.
inline std::vector<std::pair<int, double>> surrogate_trajectory(const SurrogateChain& ch, int side,
                                                                std::int64_t t, std::uint64_t seed) {
    Rng rng(seed, Stream::trajectory);
    std::vector<std::pair<int, double>> path;
    path.reserve(static_cast<std::size_t>(t) + 1);
    int s = side;
    path.emplace_back(s, 0.0);
    for (std::int64_t k = 0; k < t; ++k) {
        if (rng.bernoulli(ch.alpha_c[s])) s = 1 - s;
        path.emplace_back(s, ch.logdeg[s][ch.pick[s].sample(rng)]);
    }
    return path;
}

inline SurrogateSample surrogate_sample(const SurrogateChain& ch, int side, std::int64_t t,
                                        std::int64_t n, std::uint64_t seed) {
    if (n <= 0 || t < 0) throw std::invalid_argument("surrogate_sample: bad n or t");
    SurrogateSample out;
    out.start_side = side;
    out.n = n;
    out.t = t;
    out.sum_logdeg.assign(static_cast<std::size_t>(n), 0.0);
    out.count_in_start.assign(static_cast<std::size_t>(t) + 1, 0);
    for (std::int64_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Stream::trajectory),
                            static_cast<std::uint64_t>(i)));
        int s = side;
        double acc = 0.0;
        ++out.count_in_start[0];
        for (std::int64_t k = 1; k <= t; ++k) {
            if (rng.bernoulli(ch.alpha_c[s])) s = 1 - s;
            acc += ch.logdeg[s][ch.pick[s].sample(rng)];
            if (s == side) ++out.count_in_start[static_cast<std::size_t>(k)];
        }
        out.sum_logdeg[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

struct CltReport {
    std::int64_t t = 0, n = 0;
    double ks = 0.0;       // Kolmogorov distance of (S_t - t mu) / (nu sqrt t) to N(0,1)
    double dkw95 = 0.0;    // Monte Carlo share of that distance at 95%
    double alpha_t = 0.0;  // alpha * t, the horizon in community-mixing units
    bool short_horizon = false;
};

inline CltReport clt_check(const SurrogateChain& ch, int side, std::int64_t t, std::int64_t n,
                           std::uint64_t seed) {
    if (t <= 0) throw std::invalid_argument("clt_check: t must be positive");
    if (ch.stats.nu2 <= 0.0)
        throw std::invalid_argument("clt_check: nu2 == 0, normalized sum is degenerate");
    CltReport rep;
    rep.t = t;
    rep.n = n;
    rep.alpha_t = ch.alpha() * static_cast<double>(t);
    rep.short_horizon = rep.alpha_t < 10.0;  // needs t >> 1/alpha to be meaningful
    SurrogateSample sample = surrogate_sample(ch, side, t, n, seed);
    const double mu = ch.stats.mu;
    const double scale = std::sqrt(ch.stats.nu2 * static_cast<double>(t));
    std::vector<double> normalized(sample.sum_logdeg.size());
    for (std::size_t i = 0; i < normalized.size(); ++i)
        normalized[i] = (sample.sum_logdeg[i] - static_cast<double>(t) * mu) / scale;
    rep.ks = ks_statistic_normal(std::move(normalized));
    rep.dkw95 = dkw_band(static_cast<std::size_t>(n), 0.05);
    return rep;
}

struct SpectralGap {
    double gap = 0.0;                 // closed form: alpha
    double second_eig_closed = 0.0;   // 1 - alpha
    double second_eig_numeric = 0.0;  // from the 2x2 chain's characteristic roots
};

inline SpectralGap spectral_gap(const SurrogateChain& ch) {
    SpectralGap s;
    s.gap = ch.alpha();
    s.second_eig_closed = 1.0 - ch.alpha();
    // Eigenvalues of [[1-a0, a0], [a1, 1-a1]] via trace/determinant.
    const double tr = 2.0 - ch.alpha_c[0] - ch.alpha_c[1];
    const double det = (1.0 - ch.alpha_c[0]) * (1.0 - ch.alpha_c[1]) - ch.alpha_c[0] * ch.alpha_c[1];
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    const double lam1 = 0.5 * (tr + disc), lam2 = 0.5 * (tr - disc);
    s.second_eig_numeric = std::abs(lam1 - 1.0) < std::abs(lam2 - 1.0) ? lam2 : lam1;
    return s;
}

// Pessimistic probability budget that the graph walk and the surrogate have
// decoupled by time t.
inline double coupling_budget(std::int64_t N, std::int64_t t) {
    if (N <= 0) throw std::invalid_argument("coupling_budget: N <= 0");
    return static_cast<double>(t) * static_cast<double>(t) / static_cast<double>(N);
}

}  // namespace nbrw::theory
