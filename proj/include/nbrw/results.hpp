// Result persistence and aggregation.
//
// A results store is JSON lines: one header record carrying schema, version
// and the plan fingerprint, then one result record per (cell, replicate).
// Loading skips corrupt lines with a per-line diagnostic, never merges stores
// with mismatched fingerprints or schema, and flags duplicate coordinates
// whose content disagrees.  Records are compared for determinism audits in
// canonical form, which drops the wall-clock field.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nbrw/normal.hpp"
#include "nbrw/plan.hpp"
#include "nbrw/version.hpp"

namespace nbrw::harness {

inline nlohmann::json canonical_record(nlohmann::json rec) {
    rec.erase("runtime_ms");
    return rec;
}

inline nlohmann::json store_header(const ExperimentPlan& plan) {
    return nlohmann::json{{"record", "header"},
                          {"schema", kRecordSchema},
                          {"version", kVersion},
                          {"kind", plan.kind},
                          {"plan_fingerprint", plan_fingerprint(plan)},
                          {"master_seed", plan.master_seed}};
}

inline void write_store(std::ostream& os, const ExperimentPlan& plan,
                        const std::vector<nlohmann::json>& records) {
    os << store_header(plan).dump() << "\n";
    for (const auto& r : records) os << r.dump() << "\n";
}

struct LoadedStore {
    nlohmann::json header;
    std::vector<nlohmann::json> records;
    std::vector<std::string> diagnostics;
    int skipped = 0;
    bool ok = true;
};

inline LoadedStore load_store(std::istream& is) {
    LoadedStore store;
    std::string line;
    int line_no = 0;
    std::map<std::pair<std::string, std::int64_t>, std::string> seen;  // (cell, rep) -> spec_hash
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            ++store.skipped;
            store.diagnostics.push_back("line " + std::to_string(line_no) + ": unparseable, skipped");
            continue;
        }
        const std::string type = j.value("record", "");
        if (type == "header") {
            if (!store.header.is_null()) {
                store.diagnostics.push_back("line " + std::to_string(line_no) + ": duplicate header");
                store.ok = false;
                continue;
            }
            if (j.value("schema", -1) != kRecordSchema) {
                store.diagnostics.push_back("line " + std::to_string(line_no) +
                                            ": unsupported schema, refusing to load");
                store.ok = false;
            }
            store.header = std::move(j);
            continue;
        }
        if (type != "result") {
            ++store.skipped;
            store.diagnostics.push_back("line " + std::to_string(line_no) +
                                        ": unknown record type, skipped");
            continue;
        }
        if (!j.contains("cell") || !j.contains("replicate") || !j.contains("spec_hash")) {
            ++store.skipped;
            store.diagnostics.push_back("line " + std::to_string(line_no) +
                                        ": result missing required fields, skipped");
            continue;
        }
        const auto key = std::make_pair(j.at("cell").get<std::string>(),
                                        j.at("replicate").get<std::int64_t>());
        const std::string hash = j.at("spec_hash").get<std::string>();
        const auto [it, inserted] = seen.emplace(key, hash);
        if (!inserted) {
            if (it->second != hash) {
                store.diagnostics.push_back("line " + std::to_string(line_no) + ": cell " +
                                            key.first + " replicate " +
                                            std::to_string(key.second) +
                                            " re-appears with a different spec hash; conflict");
                store.ok = false;
            } else {
                store.diagnostics.push_back("line " + std::to_string(line_no) +
                                            ": duplicate record dropped");
                ++store.skipped;
            }
            continue;
        }
        store.records.push_back(std::move(j));
    }
    return store;
}

namespace detail {

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

inline double median_of(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline std::string fmt_csv(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
}

// Records grouped by cell id in first-seen order.
inline std::vector<std::pair<std::string, std::vector<const nlohmann::json*>>> by_cell(
    const std::vector<nlohmann::json>& records) {
    std::vector<std::pair<std::string, std::vector<const nlohmann::json*>>> groups;
    std::map<std::string, std::size_t> index;
    for (const auto& r : records) {
        const std::string cell = r.value("cell", "?");
        auto it = index.find(cell);
        if (it == index.end()) {
            index.emplace(cell, groups.size());
            groups.push_back({cell, {&r}});
        } else {
            groups[it->second].second.push_back(&r);
        }
    }
    return groups;
}

inline std::vector<const nlohmann::json*> accepted(const std::vector<const nlohmann::json*>& rs) {
    std::vector<const nlohmann::json*> out;
    for (const auto* r : rs)
        if (!r->contains("rejected")) out.push_back(r);
    return out;
}

}  // namespace detail

// Kind-aware aggregation of raw records into one summary document.
inline nlohmann::json summarize(const std::string& kind,
                                const std::vector<nlohmann::json>& records) {
    using nlohmann::json;
    json out{{"kind", kind}, {"n_records", records.size()}};
    json cells = json::array();
    const auto groups = detail::by_cell(records);

    for (const auto& [cell_id, all_records] : groups) {
        const auto recs = detail::accepted(all_records);
        json cj{{"cell", cell_id},
                {"n_records", all_records.size()},
                {"n_rejected", all_records.size() - recs.size()}};
        if (!recs.empty()) {
            std::vector<double> alphas, ns;
            for (const auto* r : recs) {
                alphas.push_back(r->value("alpha", 0.0));
                ns.push_back(static_cast<double>(r->value("N", std::int64_t{0})));
            }
            cj["alpha_mean"] = detail::mean_of(alphas);
            cj["N_mean"] = detail::mean_of(ns);
            cj["regime"] = (*recs.front()).value("regime", "");
        }

        if (kind == "cutoff-profile" || kind == "window-scaling") {
            // lambda grid profile against the Gaussian tail
            if (!recs.empty() && recs.front()->contains("measure") &&
                recs.front()->at("measure").contains("lambda")) {
                const auto lambdas =
                    recs.front()->at("measure").at("lambda").get<std::vector<double>>();
                std::vector<double> mean_tv, std_tv, phibar_v;
                double max_dev = 0.0;
                for (std::size_t k = 0; k < lambdas.size(); ++k) {
                    std::vector<double> vals;
                    for (const auto* r : recs)
                        vals.push_back(r->at("measure").at("tv").at(k).get<double>());
                    mean_tv.push_back(detail::mean_of(vals));
                    std_tv.push_back(detail::sample_std(vals));
                    phibar_v.push_back(theory::phibar(lambdas[k]));
                    max_dev = std::max(max_dev, std::abs(mean_tv.back() - phibar_v.back()));
                }
                cj["lambda"] = lambdas;
                cj["mean_tv"] = mean_tv;
                cj["std_tv"] = std_tv;
                cj["phibar"] = phibar_v;
                cj["max_abs_dev"] = max_dev;
            }
            // integer mixing-time medians per eps
            json tmix = json::object();
            json censored = json::object();
            if (!recs.empty() && recs.front()->at("measure").contains("tmix")) {
                for (const auto& [eps_key, dummy] : recs.front()->at("measure").at("tmix").items()) {
                    (void)dummy;
                    std::vector<double> ts;
                    int cens = 0;
                    for (const auto* r : recs) {
                        const auto& e = r->at("measure").at("tmix").at(eps_key);
                        if (e.at("censored").get<bool>()) ++cens;
                        else ts.push_back(e.at("t").get<double>());
                    }
                    tmix[eps_key] = detail::median_of(ts);
                    censored[eps_key] = cens;
                }
            }
            cj["tmix_median"] = tmix;
            cj["censored"] = censored;
        }

        if (kind == "window-scaling") {
            std::vector<double> spreads, predicted;
            for (const auto* r : recs) {
                const auto& m = r->at("measure");
                if (m.contains("spread") && m.at("spread").is_number()) {
                    spreads.push_back(m.at("spread").get<double>());
                    predicted.push_back(m.at("predicted_spread").get<double>());
                }
            }
            cj["n_spread"] = spreads.size();
            cj["mean_spread"] = detail::mean_of(spreads);
            cj["se_spread"] = spreads.empty()
                                  ? 0.0
                                  : detail::sample_std(spreads) /
                                        std::sqrt(static_cast<double>(spreads.size()));
            cj["mean_predicted_spread"] = detail::mean_of(predicted);
            if (!recs.empty()) {
                cj["split"] = recs.front()->at("target").value("split", 0.5);
                cj["N_target"] = recs.front()->at("target").value("N", std::int64_t{0});
                if (recs.front()->at("target").contains("alpha"))
                    cj["alpha_target"] = recs.front()->at("target").at("alpha").get<double>();
            }
        }

        if (kind == "no-cutoff-scaling") {
            std::map<std::string, std::vector<double>> t_by_eps, ta_by_eps;
            std::map<std::string, int> cens_by_eps, viol_by_eps;
            for (const auto* r : recs) {
                const double alpha = r->value("alpha", 0.0);
                for (const auto& s : r->at("measure").at("per_start")) {
                    for (const auto& [eps_key, est] : s.at("tmix").items()) {
                        if (est.at("censored").get<bool>()) {
                            ++cens_by_eps[eps_key];
                        } else {
                            const double t = est.at("t").get<double>();
                            t_by_eps[eps_key].push_back(t);
                            ta_by_eps[eps_key].push_back(t * alpha);
                        }
                        if (!s.at("bound_ok").at(eps_key).get<bool>()) ++viol_by_eps[eps_key];
                    }
                }
            }
            json per_eps = json::object();
            for (const auto& [eps_key, ts] : t_by_eps) {
                per_eps[eps_key] = json{{"tmix_median", detail::median_of(ts)},
                                        {"alpha_tmix_median", detail::median_of(ta_by_eps[eps_key])},
                                        {"censored", cens_by_eps[eps_key]},
                                        {"bound_violations", viol_by_eps[eps_key]},
                                        {"n", ts.size()}};
            }
            cj["per_eps"] = per_eps;
            if (!t_by_eps.empty()) {
                // cutoff ratio between the smallest and largest eps medians
                std::vector<std::pair<double, std::string>> keys;
                for (const auto& [k, v] : t_by_eps) keys.push_back({std::stod(k), k});
                std::sort(keys.begin(), keys.end());
                const double lo = detail::median_of(t_by_eps[keys.front().second]);
                const double hi = detail::median_of(t_by_eps[keys.back().second]);
                if (hi > 0.0) cj["cutoff_ratio"] = lo / hi;
            }
        }

        if (kind == "surrogate-match") {
            std::int64_t within = 0, points = 0;
            double max_z = 0.0;
            bool budget_ok = true;
            double budget = 0.0;
            for (const auto* r : recs) {
                const auto& m = r->at("measure");
                within += m.at("n_within_3se").get<std::int64_t>();
                points += m.at("n_points").get<std::int64_t>();
                max_z = std::max(max_z, m.at("max_abs_z").get<double>());
                budget = m.at("budget").get<double>();
                budget_ok = budget_ok && m.at("budget_ok").get<bool>();
            }
            cj["n_within_3se"] = within;
            cj["n_points"] = points;
            cj["frac_within_3se"] = points > 0 ? static_cast<double>(within) /
                                                     static_cast<double>(points)
                                               : 0.0;
            cj["max_abs_z"] = max_z;
            cj["budget"] = budget;
            cj["budget_ok"] = budget_ok;
        }

        if (kind == "clt") {
            std::vector<double> ks_t, ks_2t;
            bool short_any = false;
            for (const auto* r : recs) {
                const auto& m = r->at("measure");
                ks_t.push_back(m.at("ks_t").get<double>());
                ks_2t.push_back(m.at("ks_2t").get<double>());
                short_any = short_any || m.at("short_horizon").get<bool>();
            }
            cj["ks_t_mean"] = detail::mean_of(ks_t);
            cj["ks_2t_mean"] = detail::mean_of(ks_2t);
            cj["short_horizon_any"] = short_any;
            if (!recs.empty()) cj["dkw95"] = recs.front()->at("measure").value("dkw95", 0.0);
        }

        if (kind == "root-fraction") {
            std::vector<double> fr;
            for (const auto* r : recs) fr.push_back(r->at("measure").at("fraction").get<double>());
            cj["min_fraction"] = fr.empty() ? 0.0 : *std::min_element(fr.begin(), fr.end());
            cj["mean_fraction"] = detail::mean_of(fr);
            if (!recs.empty()) cj["radius"] = recs.front()->at("measure").at("radius").get<int>();
        }

        cells.push_back(std::move(cj));
    }
    out["cells"] = cells;

    if (kind == "window-scaling") {
        // log-log regression of measured spread against predicted spread
        std::vector<double> xs, ys;
        for (const auto& cj : out["cells"]) {
            if (!cj.contains("mean_spread") || cj.value("n_spread", std::size_t{0}) == 0) continue;
            const double ms = cj.at("mean_spread").get<double>();
            const double ps = cj.at("mean_predicted_spread").get<double>();
            if (ms > 0.0 && ps > 0.0) {
                xs.push_back(std::log(ps));
                ys.push_back(std::log(ms));
            }
        }
        if (xs.size() >= 2) {
            const double mx = detail::mean_of(xs), my = detail::mean_of(ys);
            double sxx = 0.0, sxy = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sxx += (xs[i] - mx) * (xs[i] - mx);
                sxy += (xs[i] - mx) * (ys[i] - my);
            }
            if (sxx > 0.0) {
                out["spread_regression"] = json{{"slope", sxy / sxx},
                                                {"intercept", my - sxy / sxx * mx},
                                                {"n_cells", xs.size()}};
            }
        }
    }

    if (kind == "no-cutoff-scaling") {
        // consistency of tmix * alpha across cells, per eps
        std::map<std::string, std::vector<double>> medians;
        for (const auto& cj : out["cells"]) {
            if (!cj.contains("per_eps")) continue;
            for (const auto& [eps_key, e] : cj.at("per_eps").items())
                medians[eps_key].push_back(e.at("alpha_tmix_median").get<double>());
        }
        json ratios = json::object();
        for (const auto& [eps_key, ms] : medians) {
            if (ms.empty()) continue;
            const double lo = *std::min_element(ms.begin(), ms.end());
            const double hi = *std::max_element(ms.begin(), ms.end());
            if (lo > 0.0) ratios[eps_key] = hi / lo;
        }
        out["alpha_tmix_spread_across_cells"] = ratios;
    }

    return out;
}

// profile.csv: one row per (cell, lambda) with the measured mean distance and
// the Gaussian tail target.
inline void export_profile_csv(const nlohmann::json& summary, std::ostream& os) {
    os << "cell,lambda,mean_tv,std_tv,phibar\n";
    for (const auto& cj : summary.at("cells")) {
        if (!cj.contains("lambda")) continue;
        const auto& lambda = cj.at("lambda");
        for (std::size_t k = 0; k < lambda.size(); ++k) {
            os << cj.at("cell").get<std::string>() << ','
               << detail::fmt_csv(lambda.at(k).get<double>()) << ','
               << detail::fmt_csv(cj.at("mean_tv").at(k).get<double>()) << ','
               << detail::fmt_csv(cj.at("std_tv").at(k).get<double>()) << ','
               << detail::fmt_csv(cj.at("phibar").at(k).get<double>()) << '\n';
        }
    }
}

// tmix.csv: one row per (cell, eps) median mixing time with realized alpha
// and N.
inline void export_tmix_csv(const nlohmann::json& summary, std::ostream& os) {
    os << "cell,eps,tmix,alpha,N\n";
    for (const auto& cj : summary.at("cells")) {
        const std::string cell = cj.at("cell").get<std::string>();
        const double alpha = cj.value("alpha_mean", 0.0);
        const auto n = static_cast<std::int64_t>(std::llround(cj.value("N_mean", 0.0)));
        auto emit = [&](const std::string& eps_key, double tmix) {
            if (std::isnan(tmix)) return;
            os << cell << ',' << eps_key << ',' << detail::fmt_csv(tmix) << ','
               << detail::fmt_csv(alpha) << ',' << n << '\n';
        };
        if (cj.contains("tmix_median"))
            for (const auto& [eps_key, v] : cj.at("tmix_median").items())
                emit(eps_key, v.is_number() ? v.get<double>()
                                            : std::numeric_limits<double>::quiet_NaN());
        if (cj.contains("per_eps"))
            for (const auto& [eps_key, e] : cj.at("per_eps").items())
                emit(eps_key, e.at("tmix_median").is_number()
                                  ? e.at("tmix_median").get<double>()
                                  : std::numeric_limits<double>::quiet_NaN());
    }
}

}  // namespace nbrw::harness
