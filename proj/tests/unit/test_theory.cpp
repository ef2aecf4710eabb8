#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nbrw/alias.hpp"
#include "nbrw/normal.hpp"
#include "nbrw/prediction.hpp"
#include "nbrw/stats.hpp"
#include "nbrw/surrogate.hpp"

using namespace nbrw;
using model::CommunitySpec;

namespace {

// Independent normal CDF: Taylor series for small arguments, Lentz continued
// fraction for the complementary tail.  No call into normal.hpp or std::erfc.
double erf_series(double z) {
    double term = z, sum = z;
    for (int n = 1; n < 200; ++n) {
        term *= -z * z / n;
        sum += term / (2 * n + 1);
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return 2.0 / std::sqrt(M_PI) * sum;
}

double erfc_cf(double z) {  // z > 0: sqrt(pi) e^{z^2} erfc(z) = 1/(z+ (1/2)/(z+ (2/2)/(z+ ...)))
    const double tiny = 1e-300;
    double f = tiny, c = f, d = 0.0;
    for (int i = 1; i < 400; ++i) {
        const double a = i == 1 ? 1.0 : (i - 1) / 2.0;
        d = z + a * d;
        if (d == 0.0) d = tiny;
        c = z + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-z * z) / std::sqrt(M_PI) * f;
}

double normal_cdf_oracle(double x) {
    const double z = x / std::sqrt(2.0);
    if (std::abs(z) < 2.0) return 0.5 * (1.0 + erf_series(z));
    return z > 0 ? 1.0 - 0.5 * erfc_cf(z) : 0.5 * erfc_cf(-z);
}

double quantile_oracle(double p) {
    double lo = -12.0, hi = 12.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf_oracle(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

CommunitySpec mixed_spec() {
    CommunitySpec s;
    s.degrees_0 = {3, 3, 4};           // N0 = 10
    s.degrees_1 = {3, 4, 4, 3};        // N1 = 14
    s.p = 4;
    return s;
}

}  // namespace

TEST_CASE("summary statistics match brute-force half-edge enumeration") {
    const auto s = mixed_spec();
    const auto st = theory::compute_stats(s);

    std::vector<double> all, side[2];
    for (int side_i = 0; side_i < 2; ++side_i)
        for (int d : (side_i == 0 ? s.degrees_0 : s.degrees_1))
            for (int k = 0; k < d; ++k) {
                side[side_i].push_back(std::log(d - 1.0));
                all.push_back(std::log(d - 1.0));
            }
    auto mean = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        return m / v.size();
    };
    auto var = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        return s2 / v.size();
    };

    CHECK(st.N0 == 10);
    CHECK(st.N1 == 14);
    CHECK(st.N == 24);
    CHECK(st.alpha0 == Catch::Approx(4.0 / 10.0).margin(1e-15));
    CHECK(st.alpha1 == Catch::Approx(4.0 / 14.0).margin(1e-15));
    CHECK(st.alpha == Catch::Approx(st.alpha0 + st.alpha1).margin(1e-15));
    CHECK(st.mu == Catch::Approx(mean(all)).margin(1e-12));
    CHECK(st.sigma2 == Catch::Approx(var(all)).margin(1e-12));
    for (int i = 0; i < 2; ++i) {
        CHECK(st.mu_c[i] == Catch::Approx(mean(side[i])).margin(1e-12));
        CHECK(st.sigma2_c[i] == Catch::Approx(var(side[i])).margin(1e-12));
    }
    CHECK(st.min_degree == 3);
    CHECK(st.max_degree == 4);

    // total variance decomposition ties the pieces together
    const double w0 = 10.0 / 24.0, w1 = 14.0 / 24.0;
    const double between = w0 * std::pow(st.mu_c[0] - st.mu, 2) + w1 * std::pow(st.mu_c[1] - st.mu, 2);
    CHECK(st.sigma2 ==
          Catch::Approx(w0 * st.sigma2_c[0] + w1 * st.sigma2_c[1] + between).margin(1e-12));

    // nu2 = sigma2 + community term
    const double term =
        theory::nu2_community_term(w0, st.alpha, std::abs(st.mu_c[0] - st.mu_c[1]));
    CHECK(st.nu2 == Catch::Approx(st.sigma2 + term).margin(1e-12));
}

TEST_CASE("community term has the closed-form value and grows with the gap") {
    CHECK(theory::nu2_community_term(0.5, 0.5, 1.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(theory::nu2_community_term(0.5, 0.5, 0.0) == 0.0);
    double prev = -1.0;
    for (double gap : {0.1, 0.2, 0.4, 0.8}) {
        const double t = theory::nu2_community_term(0.3, 0.4, gap);
        CHECK(t > prev);
        prev = t;
    }
}

TEST_CASE("single-degree specs have zero variance everywhere") {
    CommunitySpec s;
    s.degrees_0.assign(6, 3);
    s.degrees_1.assign(6, 3);
    s.p = 2;
    const auto st = theory::compute_stats(s);
    CHECK(st.mu == Catch::Approx(std::log(2.0)));
    CHECK(st.sigma2 == 0.0);
    CHECK(st.nu2 == 0.0);  // equal communities: no between-community term
}

TEST_CASE("normal quantile agrees with an independent inversion oracle") {
    for (double p : {1e-6, 1e-4, 0.01, 0.1, 0.25, 0.5, 0.6744, 0.9, 0.99, 0.9999, 1.0 - 1e-6}) {
        CHECK(std::abs(theory::phi_inv(p) - quantile_oracle(p)) < 1e-9);
    }
    // forward consistency as well
    for (double x = -5.0; x <= 5.0; x += 0.25)
        CHECK(theory::phi_cdf(x) == Catch::Approx(normal_cdf_oracle(x)).margin(1e-12));
}

TEST_CASE("quantile symmetry and fixed points") {
    CHECK(theory::phi_inv(0.5) == Catch::Approx(0.0).margin(1e-12));
    for (double p : {0.01, 0.2, 0.35})
        CHECK(theory::phi_inv(p) == Catch::Approx(-theory::phi_inv(1.0 - p)).margin(1e-10));
    CHECK(theory::phibar_inv(0.25) == Catch::Approx(0.67448975019608171).margin(1e-9));
    CHECK(theory::phibar_inv(0.75) == Catch::Approx(-0.67448975019608171).margin(1e-9));
    CHECK_THROWS(theory::phi_inv(0.0));
    CHECK_THROWS(theory::phi_inv(1.0));
}

TEST_CASE("ks statistic detects and clears") {
    const std::size_t n = 1000;
    std::vector<double> perfect(n);
    for (std::size_t i = 0; i < n; ++i)
        perfect[i] = theory::phi_inv((static_cast<double>(i) + 0.5) / n);
    CHECK(theory::ks_statistic_normal(perfect) < 1e-3);

    std::vector<double> degenerate(n, 0.0);
    CHECK(theory::ks_statistic_normal(degenerate) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("dkw band value") {
    CHECK(theory::dkw_band(1000, 0.05) ==
          Catch::Approx(std::sqrt(std::log(2.0 / 0.05) / 2000.0)).margin(1e-15));
    CHECK(theory::dkw_band(1000, 0.05) == Catch::Approx(0.04294695).margin(1e-7));
}

TEST_CASE("alias table reproduces its weights") {
    theory::AliasTable table({0.2, 0.3, 0.5});
    const int n = 200000;
    int counts[3] = {0, 0, 0};
    Rng rng(17);
    for (int i = 0; i < n; ++i) ++counts[table.sample(rng)];
    const double q[3] = {0.2, 0.3, 0.5};
    for (int k = 0; k < 3; ++k)
        CHECK(std::abs(counts[k] / double(n) - q[k]) < 4.0 * std::sqrt(q[k] * (1 - q[k]) / n));
    CHECK_THROWS(theory::AliasTable(std::vector<double>{}));
    CHECK_THROWS(theory::AliasTable({1.0, -0.5}));
}

TEST_CASE("surrogate chain carries the community spec's switch rates") {
    const auto s = mixed_spec();
    const auto ch = theory::SurrogateChain::from_spec(s);
    CHECK(ch.alpha_c[0] == Catch::Approx(4.0 / 10.0));
    CHECK(ch.alpha_c[1] == Catch::Approx(4.0 / 14.0));
    CHECK(ch.N_c[0] == 10);
    CHECK(ch.N_c[1] == 14);
    CHECK(ch.alpha() == Catch::Approx(theory::compute_stats(s).alpha));
}

TEST_CASE("closed-form occupancy equals the two-state recursion") {
    Rng rng(2025);
    for (int trial = 0; trial < 100; ++trial) {
        CommunitySpec s;
        s.degrees_0.assign(2 + rng.below(40), 3);
        s.degrees_1.assign(2 + rng.below(40), 4);
        const std::int64_t max_p = std::min(s.half_edges(0), s.half_edges(1));
        s.p = 2 * (1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_p / 2))));
        const auto ch = theory::SurrogateChain::from_spec(s);
        const int side = static_cast<int>(rng.below(2));
        double occ = 1.0;
        for (std::int64_t t = 0; t <= 1000; ++t) {
            REQUIRE(theory::surrogate_occupancy_closed_form(ch, side, t) ==
                    Catch::Approx(occ).margin(1e-12));
            occ = occ * (1.0 - ch.alpha_c[side]) + (1.0 - occ) * ch.alpha_c[1 - side];
        }
    }
}

TEST_CASE("occupancy approaches the stationary share at rate 1 - alpha") {
    const auto ch = theory::SurrogateChain::from_spec(mixed_spec());
    const double stat = 10.0 / 24.0;  // stationary share of the start side
    const double rate = std::log(1.0 - ch.alpha());
    // beyond t ~ 15 the geometric term sinks under the ulp of the share and
    // the ratio is pure cancellation noise
    for (std::int64_t t = 1; t <= 12; ++t) {
        const double a = theory::surrogate_occupancy_closed_form(ch, 0, t) - stat;
        const double b = theory::surrogate_occupancy_closed_form(ch, 0, t + 1) - stat;
        CHECK(std::log(b / a) == Catch::Approx(rate).margin(1e-9));
    }
}

TEST_CASE("spectral gap of the two-state chain") {
    CommunitySpec s;          // alpha0 = alpha1 = 0.1
    s.degrees_0.assign(10, 3);
    s.degrees_1.assign(10, 3);
    s.p = 3;  // N0 = N1 = 30, p/N = 0.1
    const auto ch = theory::SurrogateChain::from_spec(s);
    const auto gap = theory::spectral_gap(ch);
    CHECK(gap.gap == Catch::Approx(0.2).margin(1e-15));
    CHECK(gap.second_eig_closed == Catch::Approx(0.8).margin(1e-15));
    CHECK(gap.second_eig_numeric == Catch::Approx(0.8).margin(1e-12));
}

TEST_CASE("coupling budget") {
    CHECK(theory::coupling_budget(1000000, 100) == Catch::Approx(0.01).margin(1e-15));
    CHECK(theory::coupling_budget(100, 100) == Catch::Approx(100.0));
}

TEST_CASE("clt check rejects a degenerate log-degree law") {
    CommunitySpec s;
    s.degrees_0.assign(10, 3);
    s.degrees_1.assign(10, 3);
    s.p = 2;
    const auto ch = theory::SurrogateChain::from_spec(s);
    CHECK_THROWS_AS(theory::clt_check(ch, 0, 100, 100, 1), std::invalid_argument);
    CHECK_THROWS_AS(theory::clt_check(theory::SurrogateChain::from_spec(mixed_spec()), 0, 0, 10, 1),
                    std::invalid_argument);
}

TEST_CASE("normalized log-degree sums approach the normal law") {
    CommunitySpec s;
    s.degrees_0.assign(40, 3);   // N0 = 120
    s.degrees_1.assign(30, 4);   // N1 = 120
    s.p = 24;                    // alpha0 = alpha1 = 0.2
    const auto ch = theory::SurrogateChain::from_spec(s);
    const auto short_run = theory::clt_check(ch, 0, 25, 2000, 9);
    const auto long_run = theory::clt_check(ch, 0, 400, 2000, 9);
    CHECK(long_run.ks < 0.08);
    CHECK(long_run.ks < short_run.ks);
    CHECK_FALSE(long_run.short_horizon);
    CHECK(long_run.alpha_t == Catch::Approx(0.4 * 400));
    CHECK(theory::clt_check(ch, 0, 20, 100, 9).short_horizon);  // alpha t = 8 < 10
}

TEST_CASE("prediction classifies regimes against thresholds") {
    CommunitySpec cutoffish;
    cutoffish.degrees_0.assign(400, 3);
    cutoffish.degrees_1.assign(300, 4);
    cutoffish.p = 300;
    const auto st = theory::compute_stats(cutoffish);
    model::RegimeThresholds th;  // 10 / 0.1
    const auto pr = theory::predict(st, th, {});
    CHECK(pr.c == Catch::Approx(st.alpha * std::log(double(st.N))));
    CHECK(pr.cutoff_time == Catch::Approx(std::log(double(st.N)) / st.mu));
    CHECK(pr.window ==
          Catch::Approx(std::sqrt(st.nu2 * std::log(double(st.N)) / std::pow(st.mu, 3))));
    CHECK(pr.regime == model::classify_regime(pr.c, th));
    // prediction at eps folds the window in via the upper-tail quantile
    CHECK(pr.tmix_prediction(0.25) ==
          Catch::Approx(pr.cutoff_time + 0.6744897502 * pr.window).epsilon(1e-6));

    CommunitySpec sparse;
    sparse.degrees_0.assign(4000, 3);
    sparse.degrees_1.assign(4000, 3);
    sparse.p = 2;
    const auto sp = theory::predict(theory::compute_stats(sparse), th, {});
    CHECK(sp.regime == "no-cutoff-regime");
    const auto t_default = theory::default_t_max(theory::compute_stats(sparse), sp, 0.25);
    CHECK(t_default >= static_cast<std::int64_t>(1.0 / theory::compute_stats(sparse).alpha));
}

TEST_CASE("window-condition flags") {
    // clearly separated mean log-degrees: condition holds via the gap branch
    CommunitySpec gap;
    gap.degrees_0.assign(100, 3);
    gap.degrees_1.assign(75, 4);
    gap.p = 30;
    theory::ConditionThresholds cth;
    const auto pr = theory::predict(theory::compute_stats(gap), {}, cth);
    CHECK(pr.mu_gap == Catch::Approx(std::log(3.0) - std::log(2.0)));
    CHECK(pr.condition_gap_branch);
    CHECK(pr.condition_ok);

    // equal regular sides: no gap, and the ratio branch needs a tiny gap^2/alpha
    CommunitySpec flat;
    flat.degrees_0.assign(100, 3);
    flat.degrees_1.assign(100, 3);
    flat.p = 30;
    const auto pf = theory::predict(theory::compute_stats(flat), {}, cth);
    CHECK(pf.mu_gap == 0.0);
    CHECK_FALSE(pf.condition_gap_branch);
    CHECK(pf.condition_ratio_branch);  // gap^2 / alpha = 0
    CHECK(pf.condition_ok);
    CHECK(pf.sigma2_zero);
}
