// Distance profiles D_x(t) and mixing-time estimates.
//
// D_x(t) is the total variation distance between the t-step distribution from
// a point start x and uniform.  It is weakly decreasing in t for every start
// (applying a doubly stochastic kernel contracts TV to uniform), which is
// asserted with 1e-10 slack during profiling.  The aggregate profile is the
// max over the sampled starts, a lower bound on the worst-case profile.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nbrw/operator.hpp"
#include "nbrw/rng.hpp"

namespace nbrw::walk {

struct ProfileOptions {
    // Stop a start's evolution once its distance falls strictly below this
    // (0 disables).  All tmix queries for eps >= early_stop_eps stay exact.
    double early_stop_eps = 0.0;
};

struct DistanceProfile {
    std::vector<half_edge> starts;
    std::int64_t t_max = 0;
    std::vector<std::vector<double>> per_start;  // [start][t], possibly truncated
    std::vector<double> aggregate;               // max over starts, common length

    std::int64_t common_length() const {
        std::size_t len = std::numeric_limits<std::size_t>::max();
        for (const auto& c : per_start) len = std::min(len, c.size());
        return per_start.empty() ? 0 : static_cast<std::int64_t>(len);
    }
};

inline DistanceProfile distance_profile(const NbrwOperator& op,
                                        const std::vector<half_edge>& starts,
                                        std::int64_t t_max, const ProfileOptions& opt = {}) {
    if (t_max < 0) throw std::invalid_argument("distance_profile: negative t_max");
    DistanceProfile prof;
    prof.starts = starts;
    prof.t_max = t_max;
    prof.per_start.reserve(starts.size());
    std::vector<double> next(static_cast<std::size_t>(op.N)), scratch(static_cast<std::size_t>(op.N));
    for (const half_edge x : starts) {
        if (x < 0 || x >= op.N) throw std::invalid_argument("distance_profile: start out of range");
        DistVector v = DistVector::point_mass(op.N, x);
        std::vector<double> curve;
        curve.reserve(static_cast<std::size_t>(t_max) + 1);
        double prev = 1.0 + 1e-10;
        std::int64_t since_renorm = 0;
        for (std::int64_t t = 0;; ++t) {
            const double d = tv_to_uniform(v);
            if (d > prev + 1e-10)
                throw std::runtime_error("distance_profile: distance increased at t = " +
                                         std::to_string(t));
            prev = d;
            curve.push_back(d);
            if (t == t_max) break;
            if (opt.early_stop_eps > 0.0 && d < opt.early_stop_eps) break;
            op.apply(v.data(), next, scratch);
            v.data().swap(next);
            if (++since_renorm == 64) {
                v.renormalize();
                since_renorm = 0;
            }
        }
        prof.per_start.push_back(std::move(curve));
    }
    const auto common = static_cast<std::size_t>(prof.common_length());
    prof.aggregate.assign(common, 0.0);
    for (const auto& curve : prof.per_start)
        for (std::size_t t = 0; t < common; ++t)
            prof.aggregate[t] = std::max(prof.aggregate[t], curve[t]);
    return prof;
}

struct TmixEstimate {
    std::int64_t t = -1;
    bool censored = true;
};

// First t with D(t) < eps, strict.  Censored when the curve never crosses.
inline TmixEstimate estimate_tmix(const std::vector<double>& curve, double eps) {
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("estimate_tmix: eps outside (0, 1)");
    for (std::size_t t = 0; t < curve.size(); ++t)
        if (curve[t] < eps) return {static_cast<std::int64_t>(t), false};
    return {-1, true};
}

// Fractional crossing time by linear interpolation between the last point at
// or above eps and the first strictly below.  NaN when censored.
inline double crossing_time(const std::vector<double>& curve, double eps) {
    const TmixEstimate est = estimate_tmix(curve, eps);
    if (est.censored) return std::numeric_limits<double>::quiet_NaN();
    if (est.t == 0) return 0.0;
    const auto t = static_cast<std::size_t>(est.t);
    const double hi = curve[t - 1], lo = curve[t];
    if (hi <= lo) return static_cast<double>(est.t);
    return static_cast<double>(t - 1) + (hi - eps) / (hi - lo);
}

// Linear interpolation of the profile at fractional time; clamps to the ends.
inline double profile_value_at(const std::vector<double>& curve, double t) {
    if (curve.empty()) throw std::invalid_argument("profile_value_at: empty curve");
    if (t <= 0.0) return curve.front();
    const auto last = static_cast<double>(curve.size() - 1);
    if (t >= last) return curve.back();
    const auto i = static_cast<std::size_t>(t);
    const double frac = t - static_cast<double>(i);
    return curve[i] + frac * (curve[i + 1] - curve[i]);
}

// Default start policy: k_uniform starts anywhere plus k_side forced into each
// community, all drawn from the seed's "starts" substream.
inline std::vector<half_edge> draw_starts(const NbrwOperator& op, std::uint64_t seed,
                                          int k_uniform = 16, int k_side0 = 8, int k_side1 = 8) {
    Rng rng(seed, Stream::starts);
    std::vector<half_edge> starts;
    starts.reserve(static_cast<std::size_t>(k_uniform + k_side0 + k_side1));
    const auto n0 = static_cast<std::uint64_t>(op.N0);
    const auto n1 = static_cast<std::uint64_t>(op.N - op.N0);
    for (int i = 0; i < k_uniform; ++i)
        starts.push_back(static_cast<half_edge>(rng.below(static_cast<std::uint64_t>(op.N))));
    for (int i = 0; i < k_side0; ++i) starts.push_back(static_cast<half_edge>(rng.below(n0)));
    for (int i = 0; i < k_side1; ++i)
        starts.push_back(static_cast<half_edge>(n0 + rng.below(n1)));
    return starts;
}

}  // namespace nbrw::walk
