// Experiment plans: a kind, a master seed, and blocks of (degree-law template
// x N grid x alpha-or-p grid x split grid) cells with per-cell replicates.
//
// Seed discipline: cell_seed = derive(master, block, linear cell index);
// replicate seed = derive(cell_seed, 1, replicate).  derive(cell_seed, 0, 0)
// is reserved for cell-level material (fixed degree sequences for kinds that
// want the same spec in every replicate).  All downstream draws hang off those
// through the fixed Stream tags, so records are reproducible bit for bit for
// any thread count.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nbrw/hash.hpp"
#include "nbrw/prediction.hpp"
#include "nbrw/rng.hpp"
#include "nbrw/spec.hpp"
#include "nbrw/stats.hpp"

namespace nbrw::harness {

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {
        "cutoff-profile", "no-cutoff-scaling", "surrogate-match",
        "clt", "root-fraction", "window-scaling"};
    return kinds;
}

struct StartsPolicy {
    int uniform = 16;
    int side0 = 8;
    int side1 = 8;
    int total() const { return uniform + side0 + side1; }
};

struct PlanBlock {
    model::DegreeLaw law0, law1;
    std::vector<std::int64_t> N_grid;   // target total half-edges per cell
    std::vector<double> alpha_grid;     // exclusive with p_grid
    std::vector<std::int64_t> p_grid;
    std::vector<double> split_grid{0.5};  // community-0 share of half-edges
    int replicates = 1;
    std::vector<double> eps;            // empty: inherit plan eps
    std::int64_t t_max = 0;             // 0: policy default
    StartsPolicy starts;
    std::vector<double> lambdas{-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0};
    std::int64_t n_samples = 10000;     // surrogate-match / clt
    std::int64_t t = 50;                // surrogate-match / clt horizon
    double bound_slack = 0.05;          // no-cutoff lower-bound slack
    int start_side = 0;                 // surrogate-match / clt
};

struct ExperimentPlan {
    std::string kind;
    std::uint64_t master_seed = 0;
    model::RegimeThresholds regime_thresholds;
    theory::ConditionThresholds condition_thresholds;
    std::vector<double> eps{0.25, 0.5, 0.75};
    std::vector<PlanBlock> blocks;

    const std::vector<double>& eps_for(const PlanBlock& b) const {
        return b.eps.empty() ? eps : b.eps;
    }
};

namespace detail {

inline std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
}

}  // namespace detail

inline ExperimentPlan plan_from_json(const nlohmann::json& j) {
    ExperimentPlan plan;
    plan.kind = j.at("kind").get<std::string>();
    bool known = false;
    for (const auto& k : experiment_kinds()) known = known || k == plan.kind;
    if (!known) throw std::invalid_argument("plan: unknown kind '" + plan.kind + "'");
    plan.master_seed = j.value("master_seed", std::uint64_t{0});
    if (j.contains("regime_thresholds")) {
        const auto& t = j.at("regime_thresholds");
        plan.regime_thresholds.cutoff = t.value("cutoff", plan.regime_thresholds.cutoff);
        plan.regime_thresholds.no_cutoff = t.value("no_cutoff", plan.regime_thresholds.no_cutoff);
    }
    if (j.contains("condition_thresholds")) {
        const auto& t = j.at("condition_thresholds");
        plan.condition_thresholds.mu_gap_min =
            t.value("mu_gap_min", plan.condition_thresholds.mu_gap_min);
        plan.condition_thresholds.gap2_over_alpha_max =
            t.value("gap2_over_alpha_max", plan.condition_thresholds.gap2_over_alpha_max);
    }
    if (j.contains("eps")) plan.eps = j.at("eps").get<std::vector<double>>();
    if (!j.contains("blocks") || j.at("blocks").empty())
        throw std::invalid_argument("plan: no blocks");
    for (const auto& jb : j.at("blocks")) {
        PlanBlock b;
        b.law0 = model::degree_law_from_json(jb.at("degree_law_0"));
        b.law1 = model::degree_law_from_json(jb.at("degree_law_1"));
        b.N_grid = jb.at("N").get<std::vector<std::int64_t>>();
        if (jb.contains("alpha")) b.alpha_grid = jb.at("alpha").get<std::vector<double>>();
        if (jb.contains("p")) b.p_grid = jb.at("p").get<std::vector<std::int64_t>>();
        if (b.alpha_grid.empty() == b.p_grid.empty())
            throw std::invalid_argument("plan block: exactly one of alpha / p grids required");
        if (jb.contains("split")) b.split_grid = jb.at("split").get<std::vector<double>>();
        for (double s : b.split_grid)
            if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("plan block: split outside (0, 1)");
        b.replicates = jb.value("replicates", 1);
        if (b.replicates < 1) throw std::invalid_argument("plan block: replicates < 1");
        if (jb.contains("eps")) b.eps = jb.at("eps").get<std::vector<double>>();
        b.t_max = jb.value("t_max", std::int64_t{0});
        if (jb.contains("starts")) {
            const auto& s = jb.at("starts");
            b.starts.uniform = s.value("uniform", b.starts.uniform);
            b.starts.side0 = s.value("side0", b.starts.side0);
            b.starts.side1 = s.value("side1", b.starts.side1);
        }
        if (jb.contains("lambdas")) b.lambdas = jb.at("lambdas").get<std::vector<double>>();
        b.n_samples = jb.value("n_samples", b.n_samples);
        b.t = jb.value("t", b.t);
        b.bound_slack = jb.value("bound_slack", b.bound_slack);
        b.start_side = jb.value("start_side", 0);
        plan.blocks.push_back(std::move(b));
    }
    return plan;
}

inline nlohmann::json degree_law_to_json(const model::DegreeLaw& law) {
    nlohmann::json out = nlohmann::json::array();
    for (auto [d, q] : law.atoms) out.push_back(nlohmann::json::array({d, q}));
    return out;
}

inline nlohmann::json plan_to_json(const ExperimentPlan& plan) {
    nlohmann::json out{
        {"kind", plan.kind},
        {"master_seed", plan.master_seed},
        {"regime_thresholds",
         {{"cutoff", plan.regime_thresholds.cutoff}, {"no_cutoff", plan.regime_thresholds.no_cutoff}}},
        {"condition_thresholds",
         {{"mu_gap_min", plan.condition_thresholds.mu_gap_min},
          {"gap2_over_alpha_max", plan.condition_thresholds.gap2_over_alpha_max}}},
        {"eps", plan.eps}};
    out["blocks"] = nlohmann::json::array();
    for (const auto& b : plan.blocks) {
        nlohmann::json jb{{"degree_law_0", degree_law_to_json(b.law0)},
                          {"degree_law_1", degree_law_to_json(b.law1)},
                          {"N", b.N_grid},
                          {"split", b.split_grid},
                          {"replicates", b.replicates},
                          {"t_max", b.t_max},
                          {"starts",
                           {{"uniform", b.starts.uniform},
                            {"side0", b.starts.side0},
                            {"side1", b.starts.side1}}},
                          {"lambdas", b.lambdas},
                          {"n_samples", b.n_samples},
                          {"t", b.t},
                          {"bound_slack", b.bound_slack},
                          {"start_side", b.start_side}};
        if (!b.alpha_grid.empty()) jb["alpha"] = b.alpha_grid;
        if (!b.p_grid.empty()) jb["p"] = b.p_grid;
        if (!b.eps.empty()) jb["eps"] = b.eps;
        out["blocks"].push_back(std::move(jb));
    }
    return out;
}

inline std::string plan_fingerprint(const ExperimentPlan& plan) {
    return fnv1a_hex(plan_to_json(plan).dump());
}

struct Cell {
    int block = 0;
    std::int64_t N_target = 0;
    double alpha_target = -1.0;    // < 0 when p mode
    std::int64_t p_target = -1;    // < 0 when alpha mode
    double split = 0.5;
    int replicates = 1;
    std::string id;
    std::uint64_t cell_seed = 0;
};

inline std::vector<Cell> resolve_cells(const ExperimentPlan& plan) {
    std::vector<Cell> cells;
    for (std::size_t bi = 0; bi < plan.blocks.size(); ++bi) {
        const PlanBlock& b = plan.blocks[bi];
        std::uint64_t linear = 0;
        for (const std::int64_t n : b.N_grid) {
            const std::size_t k_grid = b.alpha_grid.empty() ? b.p_grid.size() : b.alpha_grid.size();
            for (std::size_t ai = 0; ai < k_grid; ++ai) {
                for (const double split : b.split_grid) {
                    Cell c;
                    c.block = static_cast<int>(bi);
                    c.N_target = n;
                    c.split = split;
                    c.replicates = b.replicates;
                    std::string mid;
                    if (!b.alpha_grid.empty()) {
                        c.alpha_target = b.alpha_grid[ai];
                        mid = "a" + detail::fmt_g(c.alpha_target);
                    } else {
                        c.p_target = b.p_grid[ai];
                        mid = "p" + std::to_string(c.p_target);
                    }
                    c.id = "b" + std::to_string(bi) + ":N" + std::to_string(n) + ":" + mid +
                           ":s" + detail::fmt_g(split);
                    c.cell_seed = derive_seed(plan.master_seed, bi, linear);
                    cells.push_back(std::move(c));
                    ++linear;
                }
            }
        }
    }
    return cells;
}

inline std::uint64_t replicate_seed(const Cell& cell, int replicate) {
    return derive_seed(cell.cell_seed, 1, static_cast<std::uint64_t>(replicate));
}

inline std::uint64_t cell_material_seed(const Cell& cell) {
    return derive_seed(cell.cell_seed, 0, 0);
}

// Materialised cell: concrete degree sequences and p.  In alpha mode p is the
// even integer nearest alpha * N0 * N1 / N, clamped to the admissible range.
struct MaterializedCell {
    model::CommunitySpec spec;
    theory::SummaryStats stats;
    theory::TheoryPrediction pred;
    model::ValidationReport validation;
};

inline MaterializedCell materialize_cell(const ExperimentPlan& plan, const PlanBlock& block,
                                         const Cell& cell, std::uint64_t seed) {
    MaterializedCell m;
    const double mean0 = block.law0.mean();
    const double mean1 = block.law1.mean();
    auto n0 = std::max<std::int64_t>(
        1, std::llround(cell.split * static_cast<double>(cell.N_target) / mean0));
    auto n1 = std::max<std::int64_t>(
        1, std::llround((1.0 - cell.split) * static_cast<double>(cell.N_target) / mean1));
    // all-odd laws reach an even half-edge sum only at even counts
    if (!block.law0.parity_reachable(n0)) ++n0;
    if (!block.law1.parity_reachable(n1)) ++n1;
    {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Stream::degrees), 0));
        m.spec.degrees_0 = model::sample_degree_sequence(block.law0, n0, rng);
    }
    {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Stream::degrees), 1));
        m.spec.degrees_1 = model::sample_degree_sequence(block.law1, n1, rng);
    }
    const std::int64_t N0 = m.spec.half_edges(0);
    const std::int64_t N1 = m.spec.half_edges(1);
    if (cell.p_target >= 0) {
        m.spec.p = cell.p_target;
    } else {
        const double target = cell.alpha_target * static_cast<double>(N0) *
                              static_cast<double>(N1) / static_cast<double>(N0 + N1);
        std::int64_t p = 2 * std::llround(target / 2.0);
        p = std::max<std::int64_t>(2, std::min(p, std::min(N0, N1) / 2 * 2));
        m.spec.p = p;
    }
    m.validation = model::validate_spec(m.spec, plan.regime_thresholds);
    if (m.validation.model_valid) {
        m.stats = theory::compute_stats(m.spec);
        m.pred = theory::predict(m.stats, plan.regime_thresholds, plan.condition_thresholds);
    }
    return m;
}

}  // namespace nbrw::harness
