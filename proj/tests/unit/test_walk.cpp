#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nbrw/annealed.hpp"
#include "nbrw/diagnostics.hpp"
#include "nbrw/graph.hpp"
#include "nbrw/operator.hpp"
#include "nbrw/profile.hpp"
#include "nbrw/trajectory.hpp"

using namespace nbrw;
using model::CommunitySpec;
using model::half_edge;

namespace {

CommunitySpec regular_spec(int n0, int n1, std::int64_t p, int d = 3) {
    CommunitySpec s;
    s.degrees_0.assign(n0, d);
    s.degrees_1.assign(n1, d);
    s.p = p;
    return s;
}

// independent reference: full transition matrix from materialized rows
std::vector<std::vector<double>> dense_matrix(const walk::NbrwOperator& op) {
    std::vector<std::vector<double>> P(op.N, std::vector<double>(op.N, 0.0));
    for (half_edge x = 0; x < op.N; ++x)
        for (auto [y, w] : op.row(x)) P[x][y] += w;
    return P;
}

std::vector<double> matrix_step(const std::vector<std::vector<double>>& P,
                                const std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t x = 0; x < v.size(); ++x)
        if (v[x] != 0.0)
            for (std::size_t y = 0; y < v.size(); ++y) out[y] += v[x] * P[x][y];
    return out;
}

// 6+6 vertices of degree 2 forming two disjoint 6-cycles, one per community
model::PairedGraph two_cycles() {
    CommunitySpec s;
    s.degrees_0.assign(6, 2);
    s.degrees_1.assign(6, 2);
    std::vector<half_edge> eta(24);
    for (int base : {0, 12}) {
        for (int k = 0; k < 5; ++k) {
            eta[base + 2 * k + 1] = static_cast<half_edge>(base + 2 * k + 2);
            eta[base + 2 * k + 2] = static_cast<half_edge>(base + 2 * k + 1);
        }
        eta[base + 11] = static_cast<half_edge>(base);
        eta[base] = static_cast<half_edge>(base + 11);
    }
    return model::graph_from_pairing(s, eta);
}

}  // namespace

TEST_CASE("operator rows are the uniform no-return law") {
    const auto g = model::generate_graph(regular_spec(8, 8, 4), 21);
    const auto op = walk::build_operator(g);
    for (half_edge x = 0; x < op.N; ++x) {
        const auto row = op.row(x);
        REQUIRE(static_cast<int>(row.size()) == op.row_degree(x));
        double sum = 0.0;
        for (auto [y, w] : row) {
            CHECK(w == Catch::Approx(1.0 / row.size()));
            CHECK(y != g.eta[x]);                       // never bounce straight back
            CHECK(g.owner[y] == g.owner[g.eta[x]]);     // land on the mate's vertex
            sum += w;
        }
        CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("operator is doubly stochastic and eta-symmetric") {
    const auto g = model::generate_graph(regular_spec(10, 6, 4, 4), 3);
    const auto op = walk::build_operator(g);
    const auto P = dense_matrix(op);
    for (half_edge y = 0; y < op.N; ++y) {
        double col = 0.0;
        for (half_edge x = 0; x < op.N; ++x) col += P[x][y];
        CHECK(col == Catch::Approx(1.0).margin(1e-12));
    }
    for (half_edge x = 0; x < op.N; ++x)
        for (half_edge y = 0; y < op.N; ++y)
            CHECK(P[x][y] == Catch::Approx(P[g.eta[y]][g.eta[x]]).margin(1e-14));
}

TEST_CASE("build_operator rejects walk-degree-zero vertices") {
    CommunitySpec s;
    s.degrees_0 = {1, 3};
    s.degrees_1 = {2, 2};
    const auto g = model::graph_from_pairing(s, {4, 5, 6, 7, 0, 1, 2, 3});
    CHECK_THROWS(walk::build_operator(g));
}

TEST_CASE("evolve matches dense matrix powers") {
    for (std::uint64_t seed : {1ull, 17ull}) {
        const auto g = model::generate_graph(regular_spec(10, 10, 6), seed);
        const auto op = walk::build_operator(g);
        const auto P = dense_matrix(op);
        auto v = walk::DistVector::point_mass(op.N, 3);
        std::vector<double> ref(static_cast<std::size_t>(op.N), 0.0);
        ref[3] = 1.0;
        for (int t = 1; t <= 30; ++t) {
            walk::evolve(op, v, 1);
            ref = matrix_step(P, ref);
            for (half_edge y = 0; y < op.N; ++y)
                REQUIRE(v[y] == Catch::Approx(ref[y]).margin(1e-10));
        }
    }
}

TEST_CASE("total variation identities") {
    auto point = walk::DistVector::point_mass(20, 0);
    CHECK(walk::tv_to_uniform(point) == Catch::Approx(1.0 - 1.0 / 20.0));
    auto uni = walk::DistVector::uniform(20);
    CHECK(walk::tv_to_uniform(uni) == Catch::Approx(0.0).margin(1e-15));

    walk::DistVector a, b;
    a.data() = {0.5, 0.5, 0.0, 0.0};
    b.data() = {0.0, 0.5, 0.5, 0.0};
    CHECK(walk::tv_distance(a, b) == Catch::Approx(0.5));
}

TEST_CASE("mixing time estimates use a strict threshold") {
    const std::vector<double> curve{1.0, 0.6, 0.2, 0.05};
    CHECK(walk::estimate_tmix(curve, 0.25).t == 2);
    CHECK_FALSE(walk::estimate_tmix(curve, 0.25).censored);
    CHECK(walk::estimate_tmix(curve, 0.05).censored);  // 0.05 < 0.05 is false
    CHECK(walk::estimate_tmix(curve, 0.04).censored);
    CHECK(walk::estimate_tmix({0.3, 0.2}, 0.5).t == 0);
    CHECK_THROWS(walk::estimate_tmix(curve, 0.0));
    CHECK_THROWS(walk::estimate_tmix(curve, 1.0));
}

TEST_CASE("fractional crossing times interpolate linearly") {
    const std::vector<double> curve{1.0, 0.5, 0.1};
    CHECK(walk::crossing_time(curve, 0.3) == Catch::Approx(1.5));
    CHECK(walk::crossing_time(curve, 0.5) == Catch::Approx(1.0));  // 0.5 is hit at t=1... strictly below at t=2
    CHECK(std::isnan(walk::crossing_time(curve, 0.05)));
    CHECK(walk::crossing_time({0.2, 0.1}, 0.5) == 0.0);
}

TEST_CASE("profile values interpolate and clamp") {
    const std::vector<double> curve{1.0, 0.5, 0.3};
    CHECK(walk::profile_value_at(curve, 0.5) == Catch::Approx(0.75));
    CHECK(walk::profile_value_at(curve, 2.0) == Catch::Approx(0.3));
    CHECK(walk::profile_value_at(curve, 9.0) == Catch::Approx(0.3));
    CHECK(walk::profile_value_at(curve, -2.0) == Catch::Approx(1.0));
}

TEST_CASE("distance profiles are monotone and start at 1 - 1/N") {
    const auto g = model::generate_graph(regular_spec(40, 40, 8), 5);
    const auto op = walk::build_operator(g);
    const auto starts = walk::draw_starts(op, 5, 4, 2, 2);
    REQUIRE(starts.size() == 8);
    const auto prof = walk::distance_profile(op, starts, 60);
    for (const auto& curve : prof.per_start) {
        REQUIRE(curve.size() == 61);
        CHECK(curve[0] == Catch::Approx(1.0 - 1.0 / op.N));
        for (std::size_t t = 1; t < curve.size(); ++t)
            CHECK(curve[t] <= curve[t - 1] + 1e-10);
    }
    for (std::size_t t = 1; t < prof.aggregate.size(); ++t)
        CHECK(prof.aggregate[t] <= prof.aggregate[t - 1] + 1e-10);
}

TEST_CASE("early stopping truncates per-start curves") {
    const auto g = model::generate_graph(regular_spec(60, 60, 30), 8);
    const auto op = walk::build_operator(g);
    walk::ProfileOptions opt;
    opt.early_stop_eps = 0.2;
    const auto prof = walk::distance_profile(op, {0, 1}, 500, opt);
    for (const auto& curve : prof.per_start) {
        CHECK(curve.size() < 500);
        CHECK(curve.back() < 0.2);
    }
    CHECK(prof.aggregate.size() == static_cast<std::size_t>(prof.common_length()));
}

TEST_CASE("walk on a cycle never mixes") {
    const auto g = two_cycles();
    const auto op = walk::build_operator(g);
    const auto prof = walk::distance_profile(op, {0}, 50);
    for (double v : prof.per_start[0]) CHECK(v == Catch::Approx(1.0 - 1.0 / 24.0));
    CHECK(walk::estimate_tmix(prof.per_start[0], 0.5).censored);
}

TEST_CASE("single trajectory steps follow the operator row") {
    const auto g = model::generate_graph(regular_spec(4, 4, 2), 77);
    const auto op = walk::build_operator(g);
    const half_edge x0 = 2;
    const auto row = op.row(x0);
    std::vector<int> counts(static_cast<std::size_t>(op.N), 0);
    const int n = 100000;
    Rng rng(909);
    for (int i = 0; i < n; ++i) ++counts[walk::step(g, x0, rng)];
    for (half_edge y = 0; y < op.N; ++y) {
        double q = 0.0;
        for (auto [ry, w] : row)
            if (ry == y) q = w;
        const double band = 4.0 * std::sqrt(std::max(q * (1 - q), 1e-9) / n) + 1e-9;
        CHECK(std::abs(counts[y] / double(n) - q) < band);
    }
}

TEST_CASE("occupancy frequencies agree with exact evolution") {
    const auto g = model::generate_graph(regular_spec(30, 30, 6), 11);
    const auto op = walk::build_operator(g);
    const std::int64_t t = 8;
    auto v = walk::DistVector::point_mass(op.N, 0);
    walk::evolve(op, v, t);
    double exact = 0.0;
    for (half_edge y = 0; y < op.N0; ++y) exact += v[y];

    const std::int64_t n = 100000;
    const auto curve = walk::community_occupancy(g, 0, t, n, 4040);
    REQUIRE(curve.freq.size() == static_cast<std::size_t>(t) + 1);
    CHECK(curve.freq[0] == 1.0);
    const double band = 4.5 * std::sqrt(exact * (1 - exact) / double(n));
    CHECK(std::abs(curve.freq[t] - exact) < band);
    CHECK(curve.se[t] == Catch::Approx(std::sqrt(curve.freq[t] * (1 - curve.freq[t]) / double(n))));
}

TEST_CASE("trajectory sampling is seed-deterministic") {
    const auto g = model::generate_graph(regular_spec(20, 20, 4), 13);
    const auto a = walk::sample_trajectory(g, 0, 40, 99);
    const auto b = walk::sample_trajectory(g, 0, 40, 99);
    const auto c = walk::sample_trajectory(g, 0, 40, 100);
    CHECK(a == b);
    CHECK(a != c);
    REQUIRE(a.size() == 41);
}

TEST_CASE("conductance equals p over the side size") {
    const auto g = model::generate_graph(regular_spec(40, 20, 6), 2);
    const auto op = walk::build_operator(g);
    CHECK(walk::conductance(op, 0) == Catch::Approx(6.0 / 120.0).margin(1e-12));
    CHECK(walk::conductance(op, 1) == Catch::Approx(6.0 / 60.0).margin(1e-12));
}

TEST_CASE("tree-ball roots on hand-built graphs") {
    // triangle in community 0, double edge in community 1: nothing is a root
    CommunitySpec s;
    s.degrees_0.assign(3, 2);
    s.degrees_1.assign(2, 2);
    const auto g = model::graph_from_pairing(s, {5, 2, 1, 4, 3, 0, 8, 9, 6, 7});
    CHECK(walk::ball_radius(g) == 1);
    for (half_edge v = 0; v < g.vertex_count(); ++v) CHECK_FALSE(walk::tree_ball(g, v, 1));
    CHECK(walk::root_fraction(g).fraction == 0.0);

    // two 6-cycles: every radius-1 ball is a path
    const auto cyc = two_cycles();
    CHECK(walk::ball_radius(cyc) == 1);
    for (half_edge v = 0; v < cyc.vertex_count(); ++v) CHECK(walk::tree_ball(cyc, v, 1));
    CHECK(walk::root_fraction(cyc).fraction == 1.0);
    // radius 3 sees all the way around the 6-cycle
    CHECK_FALSE(walk::tree_ball(cyc, 0, 3));
}

TEST_CASE("lazy pairing reveals a full fixed-point-free involution") {
    const auto layout = walk::layout_only(regular_spec(8, 8, 4));
    walk::LazyPairing lazy(layout);
    Rng rng(64);
    std::vector<half_edge> eta(static_cast<std::size_t>(layout.N));
    for (half_edge x = 0; x < layout.N; ++x) eta[x] = lazy.mate(x, rng);
    std::int64_t crossings = 0;
    for (half_edge x = 0; x < layout.N; ++x) {
        CHECK(eta[x] != x);
        CHECK(eta[eta[x]] == x);
        crossings += (x < layout.N0) != (eta[x] < layout.N0);
    }
    CHECK(crossings == 2 * 4);
    CHECK(lazy.revealed_pairs() == static_cast<std::size_t>(layout.N) / 2);
}

TEST_CASE("lazy pairing matches the full generator's marginals") {
    // same marginal checks as the eager generator: [3,3]/[3,3]/p=2
    CommunitySpec s;
    s.degrees_0 = {3, 3};
    s.degrees_1 = {3, 3};
    s.p = 2;
    const auto layout = walk::layout_only(s);
    const int trials = 60000;
    int cross = 0, mate1 = 0, mate_first_right = 0;
    for (int i = 0; i < trials; ++i) {
        walk::LazyPairing lazy(layout);
        Rng rng(derive_seed(808, static_cast<std::uint64_t>(i)));
        const auto m = lazy.mate(0, rng);
        cross += m >= layout.N0;
        mate1 += m == 1;
        mate_first_right += m == layout.N0;
    }
    auto band = [&](double q) { return 4.0 * std::sqrt(q * (1 - q) / trials); };
    CHECK(std::abs(cross / double(trials) - 1.0 / 3.0) < band(1.0 / 3.0));
    CHECK(std::abs(mate1 / double(trials) - 2.0 / 15.0) < band(2.0 / 15.0));
    CHECK(std::abs(mate_first_right / double(trials) - 1.0 / 18.0) < band(1.0 / 18.0));
}

TEST_CASE("annealed occupancy is deterministic and anchored at 1") {
    const auto layout = walk::layout_only(regular_spec(100, 100, 10));
    const auto a = walk::annealed_occupancy(layout, 0, 12, 3000, 5);
    const auto b = walk::annealed_occupancy(layout, 0, 12, 3000, 5);
    CHECK(a.freq == b.freq);
    CHECK(a.freq[0] == 1.0);
    for (double f : a.freq) {
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
    }
}
