// Experiment workers, one per kind, plus a replicate scheduler.
//
// Every (cell, replicate) produces exactly one JSON record.  Replicates that
// fail model validation become rejection records and carry no measurement.
// All randomness descends from the plan's master seed through the cell and
// replicate derivations, so records are independent of thread count and
// execution order.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "nbrw/annealed.hpp"
#include "nbrw/diagnostics.hpp"
#include "nbrw/graph.hpp"
#include "nbrw/operator.hpp"
#include "nbrw/plan.hpp"
#include "nbrw/prediction.hpp"
#include "nbrw/profile.hpp"
#include "nbrw/surrogate.hpp"
#include "nbrw/version.hpp"

namespace nbrw::harness {

// Largest t^2 / N for which the surrogate comparison is considered in range.
inline constexpr double kCouplingBudgetMax = 0.1;

namespace detail {

inline nlohmann::json result_front(const ExperimentPlan& plan, const Cell& cell, int replicate,
                                   std::uint64_t seed) {
    nlohmann::json target{{"N", cell.N_target}, {"split", cell.split}};
    if (cell.alpha_target >= 0.0) target["alpha"] = cell.alpha_target;
    if (cell.p_target >= 0) target["p"] = cell.p_target;
    return nlohmann::json{{"record", "result"},
                          {"schema", kRecordSchema},
                          {"version", kVersion},
                          {"kind", plan.kind},
                          {"cell", cell.id},
                          {"block", cell.block},
                          {"replicate", replicate},
                          {"seed", seed},
                          {"target", std::move(target)}};
}

inline void attach_materialized(nlohmann::json& rec, const MaterializedCell& m) {
    const auto& st = m.stats;
    rec["spec_hash"] = model::spec_hash(m.spec);
    rec["N"] = st.N;
    rec["N0"] = st.N0;
    rec["N1"] = st.N1;
    rec["p"] = st.p;
    rec["alpha"] = st.alpha;
    rec["alpha0"] = st.alpha0;
    rec["alpha1"] = st.alpha1;
    rec["c"] = m.pred.c;
    rec["regime"] = m.pred.regime;
    rec["asymptotic_regime"] = m.validation.asymptotic_regime;
    rec["condition_ok"] = m.pred.condition_ok;
    rec["stats"] = nlohmann::json{{"mu", st.mu},
                                  {"sigma2", st.sigma2},
                                  {"nu2", st.nu2},
                                  {"mu0", st.mu_c[0]},
                                  {"mu1", st.mu_c[1]},
                                  {"min_degree", st.min_degree},
                                  {"max_degree", st.max_degree}};
    rec["prediction"] =
        nlohmann::json{{"cutoff_time", m.pred.cutoff_time}, {"window", m.pred.window}};
}

inline std::string join_errors(const std::vector<std::string>& errors) {
    std::string out;
    for (const auto& e : errors) {
        if (!out.empty()) out += "; ";
        out += e;
    }
    return out;
}

inline std::int64_t resolve_t_max(const PlanBlock& block, const MaterializedCell& m,
                                  double min_eps) {
    return block.t_max > 0 ? block.t_max : theory::default_t_max(m.stats, m.pred, min_eps);
}

inline nlohmann::json tmix_json(const std::vector<double>& curve, const std::vector<double>& eps) {
    nlohmann::json out = nlohmann::json::object();
    for (double e : eps) {
        const walk::TmixEstimate est = walk::estimate_tmix(curve, e);
        out[fmt_g(e)] = nlohmann::json{{"t", est.t}, {"censored", est.censored}};
    }
    return out;
}

// Shared by the cutoff-profile and window-scaling kinds: full distance
// profile, values on the lambda grid, and integer mixing times.
inline nlohmann::json profile_measure(const ExperimentPlan& plan, const PlanBlock& block,
                                      const MaterializedCell& m, const model::PairedGraph& g,
                                      std::uint64_t seed, std::vector<double>& aggregate_out) {
    const auto& eps = plan.eps_for(block);
    const double min_eps = *std::min_element(eps.begin(), eps.end());
    const double lam_max = *std::max_element(block.lambdas.begin(), block.lambdas.end());
    const std::int64_t t_max = resolve_t_max(block, m, min_eps);

    const walk::NbrwOperator op = walk::build_operator(g);
    const auto starts = walk::draw_starts(op, seed, block.starts.uniform, block.starts.side0,
                                          block.starts.side1);
    walk::ProfileOptions opt;
    opt.early_stop_eps = 0.25 * std::min(min_eps, theory::phibar(lam_max));
    const walk::DistanceProfile prof = walk::distance_profile(op, starts, t_max, opt);
    aggregate_out = prof.aggregate;

    nlohmann::json measure{{"t_max", t_max}};
    nlohmann::json lam = nlohmann::json::array(), tau = nlohmann::json::array(),
                   tv = nlohmann::json::array();
    for (double l : block.lambdas) {
        const double at = m.pred.cutoff_time + l * m.pred.window;
        lam.push_back(l);
        tau.push_back(at);
        tv.push_back(walk::profile_value_at(prof.aggregate, at));
    }
    measure["lambda"] = std::move(lam);
    measure["tau"] = std::move(tau);
    measure["tv"] = std::move(tv);
    measure["tmix"] = tmix_json(prof.aggregate, eps);
    return measure;
}

inline nlohmann::json run_cutoff_profile(const ExperimentPlan& plan, const PlanBlock& block,
                                         const MaterializedCell& m, std::uint64_t seed) {
    const model::PairedGraph g = model::generate_graph(m.spec, seed);
    std::vector<double> aggregate;
    return profile_measure(plan, block, m, g, seed, aggregate);
}

inline nlohmann::json run_window_scaling(const ExperimentPlan& plan, const PlanBlock& block,
                                         const MaterializedCell& m, std::uint64_t seed) {
    const model::PairedGraph g = model::generate_graph(m.spec, seed);
    std::vector<double> aggregate;
    nlohmann::json measure = profile_measure(plan, block, m, g, seed, aggregate);

    auto eps = plan.eps_for(block);
    std::sort(eps.begin(), eps.end());
    const double lo = eps.front(), hi = eps.back();
    const double t_lo = walk::crossing_time(aggregate, lo);   // late crossing
    const double t_hi = walk::crossing_time(aggregate, hi);   // early crossing
    nlohmann::json crossing = nlohmann::json::object();
    for (double e : eps) {
        const double t = walk::crossing_time(aggregate, e);
        crossing[fmt_g(e)] = std::isnan(t) ? nlohmann::json() : nlohmann::json(t);
    }
    measure["crossing"] = std::move(crossing);
    if (std::isnan(t_lo) || std::isnan(t_hi)) {
        measure["spread"] = nullptr;
    } else {
        measure["spread"] = t_lo - t_hi;
    }
    measure["predicted_spread"] =
        (theory::phibar_inv(lo) - theory::phibar_inv(hi)) * m.pred.window;
    return measure;
}

inline nlohmann::json run_no_cutoff_scaling(const ExperimentPlan& plan, const PlanBlock& block,
                                            const MaterializedCell& m, std::uint64_t seed) {
    const auto& eps = plan.eps_for(block);
    const double min_eps = *std::min_element(eps.begin(), eps.end());
    const std::int64_t t_max = resolve_t_max(block, m, min_eps);

    const model::PairedGraph g = model::generate_graph(m.spec, seed);
    const walk::NbrwOperator op = walk::build_operator(g);
    const auto starts = walk::draw_starts(op, seed, block.starts.uniform, block.starts.side0,
                                          block.starts.side1);
    walk::ProfileOptions opt;
    opt.early_stop_eps = 0.9 * min_eps;  // just below the smallest eps crossing
    const walk::DistanceProfile prof = walk::distance_profile(op, starts, t_max, opt);

    const auto& st = m.stats;
    const double share[2] = {static_cast<double>(st.N0) / static_cast<double>(st.N),
                             static_cast<double>(st.N1) / static_cast<double>(st.N)};
    const double alpha_side[2] = {st.alpha0, st.alpha1};

    nlohmann::json per_start = nlohmann::json::array();
    for (std::size_t si = 0; si < starts.size(); ++si) {
        const int side = starts[si] < op.N0 ? 0 : 1;
        const auto& curve = prof.per_start[si];
        nlohmann::json tmix = nlohmann::json::object(), crossing = nlohmann::json::object(),
                       bound_rhs = nlohmann::json::object(), bound_ok = nlohmann::json::object();
        for (double e : eps) {
            const std::string key = fmt_g(e);
            const walk::TmixEstimate est = walk::estimate_tmix(curve, e);
            tmix[key] = nlohmann::json{{"t", est.t}, {"censored", est.censored}};
            const double ct = walk::crossing_time(curve, e);
            crossing[key] = std::isnan(ct) ? nlohmann::json() : nlohmann::json(ct);
            // t_mix(eps) from side i is at least (share of the other side
            // minus eps minus slack) / alpha_i
            const double rhs = (share[1 - side] - e - block.bound_slack) / alpha_side[side];
            const double effective = est.censored ? static_cast<double>(t_max + 1)
                                                  : static_cast<double>(est.t);
            bound_rhs[key] = rhs;
            bound_ok[key] = effective >= rhs;
        }
        per_start.push_back(nlohmann::json{{"start", starts[si]},
                                           {"side", side},
                                           {"tmix", std::move(tmix)},
                                           {"crossing", std::move(crossing)},
                                           {"bound_rhs", std::move(bound_rhs)},
                                           {"bound_ok", std::move(bound_ok)}});
    }
    return nlohmann::json{{"t_max", t_max}, {"per_start", std::move(per_start)}};
}

inline nlohmann::json run_surrogate_match(const PlanBlock& block, const MaterializedCell& m,
                                          std::uint64_t seed) {
    const int side = block.start_side;
    const std::int64_t t = block.t;
    const model::PairedGraph layout = walk::layout_only(m.spec);
    const walk::OccupancyCurve curve =
        walk::annealed_occupancy(layout, side, t, block.n_samples, seed);

    const theory::SurrogateChain chain = theory::SurrogateChain::from_spec(m.spec);
    nlohmann::json freq = nlohmann::json::array(), se = nlohmann::json::array(),
                   closed = nlohmann::json::array(), z = nlohmann::json::array();
    std::int64_t within = 0;
    double max_z = 0.0;
    for (std::int64_t s = 0; s <= t; ++s) {
        const double f = curve.freq[static_cast<std::size_t>(s)];
        const double err = curve.se[static_cast<std::size_t>(s)];
        const double q = theory::surrogate_occupancy_closed_form(chain, side, s);
        const double diff = f - q;
        double zs = 0.0;
        if (diff != 0.0) zs = err > 0.0 ? diff / err : 1e9;
        freq.push_back(f);
        se.push_back(err);
        closed.push_back(q);
        z.push_back(zs);
        if (std::abs(zs) <= 3.0) ++within;
        max_z = std::max(max_z, std::abs(zs));
    }
    const double budget = theory::coupling_budget(m.stats.N, t);
    return nlohmann::json{{"t", t},
                          {"n", block.n_samples},
                          {"start_side", side},
                          {"freq", std::move(freq)},
                          {"se", std::move(se)},
                          {"closed_form", std::move(closed)},
                          {"z", std::move(z)},
                          {"n_within_3se", within},
                          {"n_points", t + 1},
                          {"max_abs_z", max_z},
                          {"budget", budget},
                          {"budget_ok", budget <= kCouplingBudgetMax}};
}

inline nlohmann::json run_clt(const PlanBlock& block, const MaterializedCell& m,
                              std::uint64_t seed) {
    const theory::SurrogateChain chain = theory::SurrogateChain::from_spec(m.spec);
    const theory::CltReport at_t =
        theory::clt_check(chain, block.start_side, block.t, block.n_samples,
                          derive_seed(seed, 10, 0));
    const theory::CltReport at_2t =
        theory::clt_check(chain, block.start_side, 2 * block.t, block.n_samples,
                          derive_seed(seed, 10, 1));
    return nlohmann::json{{"t", at_t.t},
                          {"t2", at_2t.t},
                          {"n", block.n_samples},
                          {"start_side", block.start_side},
                          {"ks_t", at_t.ks},
                          {"ks_2t", at_2t.ks},
                          {"dkw95", at_t.dkw95},
                          {"alpha_t", at_t.alpha_t},
                          {"short_horizon", at_t.short_horizon},
                          {"improves", at_2t.ks <= at_t.ks}};
}

inline nlohmann::json run_root_fraction(const MaterializedCell& m, std::uint64_t seed) {
    const model::PairedGraph g = model::generate_graph(m.spec, seed);
    const walk::RootReport rep = walk::root_fraction(g);
    return nlohmann::json{{"radius", rep.radius}, {"fraction", rep.fraction}};
}

}  // namespace detail

inline nlohmann::json run_replicate(const ExperimentPlan& plan, const Cell& cell, int replicate) {
    const PlanBlock& block = plan.blocks[static_cast<std::size_t>(cell.block)];
    const std::uint64_t seed = replicate_seed(cell, replicate);
    // Degrees are part of the cell for the surrogate kinds, so their closed
    // forms see one fixed parameter set per cell; elsewhere each replicate
    // redraws them.
    const bool fixed_material = plan.kind == "surrogate-match" || plan.kind == "clt";
    const std::uint64_t material_seed = fixed_material ? cell_material_seed(cell) : seed;

    nlohmann::json rec = detail::result_front(plan, cell, replicate, seed);
    MaterializedCell m;
    try {
        m = materialize_cell(plan, block, cell, material_seed);
    } catch (const std::exception& e) {
        rec["rejected"] = std::string("materialization failed: ") + e.what();
        return rec;
    }
    if (!m.validation.model_valid) {
        rec["spec_hash"] = model::spec_hash(m.spec);
        rec["rejected"] = detail::join_errors(m.validation.errors);
        return rec;
    }
    detail::attach_materialized(rec, m);

    // Kind preconditions; cells outside them yield explicit rejection records.
    const bool profile_kind = plan.kind == "cutoff-profile" || plan.kind == "window-scaling";
    if (profile_kind && m.pred.regime != "cutoff-regime") {
        rec["rejected"] = "regime '" + m.pred.regime + "' (alpha*logN = " +
                          detail::fmt_g(m.pred.c) + ") is outside the cutoff regime";
        return rec;
    }
    if (profile_kind && !(m.pred.window > 0.0)) {
        rec["rejected"] = "degenerate profile window: log-degree variance is zero";
        return rec;
    }
    if (plan.kind == "no-cutoff-scaling") {
        if (m.pred.regime != "no-cutoff-regime") {
            rec["rejected"] = "regime '" + m.pred.regime + "' (alpha*logN = " +
                              detail::fmt_g(m.pred.c) + ") is outside the no-cutoff regime";
            return rec;
        }
        // A start in community i only has t_mix(eps) defined for
        // eps < (half-edge share of the other side); enforce for every side
        // the starts policy can touch.
        double allowed = 1.0;
        const double share1 = static_cast<double>(m.stats.N1) / static_cast<double>(m.stats.N);
        const double share0 = static_cast<double>(m.stats.N0) / static_cast<double>(m.stats.N);
        if (block.starts.uniform > 0 || block.starts.side0 > 0) allowed = std::min(allowed, share1);
        if (block.starts.uniform > 0 || block.starts.side1 > 0) allowed = std::min(allowed, share0);
        for (double e : plan.eps_for(block)) {
            if (e >= allowed) {
                rec["rejected"] = "eps " + detail::fmt_g(e) +
                                  " is not below the opposite-community share " +
                                  detail::fmt_g(allowed);
                return rec;
            }
        }
    }

    if (plan.kind == "cutoff-profile") {
        rec["measure"] = detail::run_cutoff_profile(plan, block, m, seed);
    } else if (plan.kind == "window-scaling") {
        rec["measure"] = detail::run_window_scaling(plan, block, m, seed);
    } else if (plan.kind == "no-cutoff-scaling") {
        rec["measure"] = detail::run_no_cutoff_scaling(plan, block, m, seed);
    } else if (plan.kind == "surrogate-match") {
        rec["measure"] = detail::run_surrogate_match(block, m, seed);
    } else if (plan.kind == "clt") {
        rec["measure"] = detail::run_clt(block, m, seed);
    } else if (plan.kind == "root-fraction") {
        rec["measure"] = detail::run_root_fraction(m, seed);
    } else {
        throw std::invalid_argument("run_replicate: unknown kind '" + plan.kind + "'");
    }
    return rec;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;
using SkipSet = std::set<std::pair<std::string, int>>;  // (cell id, replicate)

// Runs all (cell, replicate) pairs not in `skip` and returns their records in
// plan order.  Worker threads only affect wall time, never content.
inline std::vector<nlohmann::json> run_experiment(const ExperimentPlan& plan, int threads,
                                                  const ProgressFn& progress = {},
                                                  const SkipSet* skip = nullptr) {
    struct Item {
        std::size_t cell;
        int replicate;
    };
    const std::vector<Cell> cells = resolve_cells(plan);
    std::vector<Item> items;
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
        for (int r = 0; r < cells[ci].replicates; ++r)
            if (!skip || !skip->count({cells[ci].id, r})) items.push_back({ci, r});

    std::vector<nlohmann::json> out(items.size());
    std::atomic<std::size_t> cursor{0};
    std::mutex mu;
    std::exception_ptr first_error;
    std::size_t done = 0;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= items.size()) return;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (first_error) return;
            }
            try {
                const auto t0 = std::chrono::steady_clock::now();
                nlohmann::json rec =
                    run_replicate(plan, cells[items[i].cell], items[i].replicate);
                const auto t1 = std::chrono::steady_clock::now();
                rec["runtime_ms"] =
                    std::chrono::duration<double, std::milli>(t1 - t0).count();
                out[i] = std::move(rec);
                std::lock_guard<std::mutex> lock(mu);
                ++done;
                if (progress) progress(done, items.size());
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace nbrw::harness
