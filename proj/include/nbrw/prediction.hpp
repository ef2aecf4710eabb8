// Mixing predictions from summary statistics: cutoff location log N / mu,
// Gaussian window sqrt(nu2 log N / mu^3), regime classification and the
// balanced-gap condition flags.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "nbrw/normal.hpp"
#include "nbrw/spec.hpp"
#include "nbrw/stats.hpp"

namespace nbrw::theory {

// Proxies for the condition that community means are either well separated or
// negligibly separated relative to alpha; either branch is enough.
struct ConditionThresholds {
    double mu_gap_min = 0.05;
    double gap2_over_alpha_max = 0.1;
};

struct TheoryPrediction {
    double cutoff_time = 0.0;  // log N / mu
    double window = 0.0;       // sqrt(nu2 log N / mu^3)
    double c = 0.0;            // alpha log N
    std::string regime;
    model::RegimeThresholds regime_thresholds;
    ConditionThresholds condition_thresholds;
    bool sigma2_zero = false;  // no Gaussian profile when true
    double mu_gap = 0.0;
    double gap2_over_alpha = 0.0;
    bool condition_gap_branch = false;    // |mu0 - mu1| >= mu_gap_min
    bool condition_ratio_branch = false;  // gap^2 / alpha <= gap2_over_alpha_max
    bool condition_ok = false;

    // Predicted eps-mixing time: cutoff_time + Phibar^-1(eps) * window.
    double tmix_prediction(double eps) const { return cutoff_time + phibar_inv(eps) * window; }
};

inline TheoryPrediction predict(const SummaryStats& st, const model::RegimeThresholds& rth = {},
                                const ConditionThresholds& cth = {}) {
    TheoryPrediction pr;
    pr.regime_thresholds = rth;
    pr.condition_thresholds = cth;
    const double log_n = std::log(static_cast<double>(st.N));
    pr.cutoff_time = log_n / st.mu;
    pr.sigma2_zero = st.sigma2 <= 0.0;
    pr.window = std::sqrt(st.nu2 * log_n / (st.mu * st.mu * st.mu));
    pr.c = st.alpha * log_n;
    pr.regime = model::classify_regime(pr.c, rth);
    pr.mu_gap = st.mu_gap();
    pr.gap2_over_alpha = pr.mu_gap * pr.mu_gap / st.alpha;
    pr.condition_gap_branch = pr.mu_gap >= cth.mu_gap_min;
    pr.condition_ratio_branch = pr.gap2_over_alpha <= cth.gap2_over_alpha_max;
    pr.condition_ok = pr.condition_gap_branch || pr.condition_ratio_branch;
    return pr;
}

// Horizon policy: generous multiples of the predicted scale per regime.
inline std::int64_t default_t_max(const SummaryStats& st, const TheoryPrediction& pr,
                                  double min_eps) {
    if (pr.regime == "no-cutoff-regime") {
        return static_cast<std::int64_t>(
            std::ceil(8.0 / st.alpha * std::log(1.0 / min_eps)));
    }
    return static_cast<std::int64_t>(std::ceil(4.0 * (pr.cutoff_time + 2.0 * pr.window)));
}

}  // namespace nbrw::theory
