// Half-edge weighted log-degree statistics of a spec, and the variance
// parameter nu2 that sets the profile width.
//
// Every half-edge x carries log deg(x) where deg(x) = d(owner(x)) - 1, so a
// vertex of degree d contributes d copies of log(d - 1).  Community means and
// variances are over each community's half-edges; pooled ones over all N.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "nbrw/spec.hpp"

namespace nbrw::theory {

struct SummaryStats {
    std::int64_t N = 0, N0 = 0, N1 = 0, p = 0;
    double alpha0 = 0.0, alpha1 = 0.0, alpha = 0.0;
    double mu = 0.0, sigma2 = 0.0;
    double mu_c[2] = {0.0, 0.0};      // per-community mean of log deg
    double sigma2_c[2] = {0.0, 0.0};  // per-community variance of log deg
    int min_degree = 0, max_degree = 0;
    double nu2 = 0.0;

    double mu_gap() const { return std::abs(mu_c[0] - mu_c[1]); }
};

inline SummaryStats compute_stats(const model::CommunitySpec& spec) {
    SummaryStats st;
    st.N0 = spec.half_edges(0);
    st.N1 = spec.half_edges(1);
    st.N = st.N0 + st.N1;
    st.p = spec.p;
    if (st.N0 <= 0 || st.N1 <= 0) throw std::invalid_argument("compute_stats: empty community");

    st.min_degree = std::numeric_limits<int>::max();
    st.max_degree = 0;
    double sum_all = 0.0, sumsq_all = 0.0;
    for (int side = 0; side < 2; ++side) {
        const auto& degrees = side == 0 ? spec.degrees_0 : spec.degrees_1;
        double sum = 0.0, sumsq = 0.0;
        int side_min = std::numeric_limits<int>::max(), side_max = 0;
        for (int d : degrees) {
            if (d < 2) throw std::invalid_argument("compute_stats: degree < 2");
            side_min = std::min(side_min, d);
            side_max = std::max(side_max, d);
            const double ld = std::log(static_cast<double>(d - 1));
            sum += d * ld;
            sumsq += d * ld * ld;
        }
        st.min_degree = std::min(st.min_degree, side_min);
        st.max_degree = std::max(st.max_degree, side_max);
        const double n = static_cast<double>(side == 0 ? st.N0 : st.N1);
        if (side_min == side_max) {
            // regular community: zero variance exactly, no float residue
            st.mu_c[side] = std::log(static_cast<double>(side_min - 1));
            st.sigma2_c[side] = 0.0;
        } else {
            st.mu_c[side] = sum / n;
            // max with 0 absorbs float cancellation on near-constant sequences
            st.sigma2_c[side] = std::max(0.0, sumsq / n - st.mu_c[side] * st.mu_c[side]);
        }
        sum_all += sum;
        sumsq_all += sumsq;
    }
    if (st.min_degree == st.max_degree) {
        st.mu = std::log(static_cast<double>(st.min_degree - 1));
        st.sigma2 = 0.0;
    } else {
        st.mu = sum_all / static_cast<double>(st.N);
        st.sigma2 = std::max(0.0, sumsq_all / static_cast<double>(st.N) - st.mu * st.mu);
    }

    st.alpha0 = static_cast<double>(st.p) / static_cast<double>(st.N0);
    st.alpha1 = static_cast<double>(st.p) / static_cast<double>(st.N1);
    st.alpha = st.alpha0 + st.alpha1;

    const double gap = st.mu_c[0] - st.mu_c[1];
    const double nn = static_cast<double>(st.N) * static_cast<double>(st.N);
    const double community_term = 2.0 * static_cast<double>(st.N0) * static_cast<double>(st.N1) *
                                  (1.0 - st.alpha) / nn * gap * gap / st.alpha;
    st.nu2 = st.sigma2 + community_term;
    return st;
}

// The alpha-sensitive part of nu2 in isolation, as a function of the community
// split.  share = N0/N.  Maximised at share = 1/2 for fixed alpha and gap.
inline double nu2_community_term(double share, double alpha, double mu_gap) {
    return 2.0 * share * (1.0 - share) * (1.0 - alpha) * mu_gap * mu_gap / alpha;
}

}  // namespace nbrw::theory
