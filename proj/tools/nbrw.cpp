// Command line front end: simulate one spec, print theory predictions, run
// experiment plans, and export reports from stored results.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nbrw/results.hpp"
#include "nbrw/runners.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

json validation_to_json(const nbrw::model::ValidationReport& v) {
    return json{{"model_valid", v.model_valid},
                {"asymptotic_regime", v.asymptotic_regime},
                {"errors", v.errors},
                {"asymptotic_notes", v.asymptotic_notes},
                {"alpha0", v.alpha0},
                {"alpha1", v.alpha1},
                {"alpha", v.alpha},
                {"c", v.c},
                {"regime_hint", v.regime_hint}};
}

json stats_to_json(const nbrw::theory::SummaryStats& st) {
    return json{{"N", st.N},       {"N0", st.N0},
                {"N1", st.N1},     {"p", st.p},
                {"alpha", st.alpha}, {"alpha0", st.alpha0},
                {"alpha1", st.alpha1}, {"mu", st.mu},
                {"sigma2", st.sigma2}, {"nu2", st.nu2},
                {"mu0", st.mu_c[0]},   {"mu1", st.mu_c[1]},
                {"min_degree", st.min_degree}, {"max_degree", st.max_degree}};
}

json prediction_to_json(const nbrw::theory::TheoryPrediction& pr,
                        const std::vector<double>& eps) {
    json tmix = json::object();
    for (double e : eps) tmix[nbrw::harness::detail::fmt_g(e)] = pr.tmix_prediction(e);
    return json{{"cutoff_time", pr.cutoff_time},
                {"window", pr.window},
                {"c", pr.c},
                {"regime", pr.regime},
                {"sigma2_zero", pr.sigma2_zero},
                {"mu_gap", pr.mu_gap},
                {"gap2_over_alpha", pr.gap2_over_alpha},
                {"condition_ok", pr.condition_ok},
                {"tmix", std::move(tmix)}};
}

int cmd_predict(const std::string& spec_path, const std::vector<double>& eps) {
    const auto loaded = nbrw::model::spec_from_json(read_json_file(spec_path));
    const auto validation = nbrw::model::validate_spec(loaded.spec);
    json out{{"spec_hash", nbrw::model::spec_hash(loaded.spec)},
             {"validation", validation_to_json(validation)}};
    if (validation.model_valid) {
        const auto st = nbrw::theory::compute_stats(loaded.spec);
        const auto pr = nbrw::theory::predict(st);
        out["stats"] = stats_to_json(st);
        out["prediction"] = prediction_to_json(pr, eps);
        const double min_eps = *std::min_element(eps.begin(), eps.end());
        out["default_t_max"] = nbrw::theory::default_t_max(st, pr, min_eps);
    }
    std::cout << out.dump(2) << "\n";
    return validation.model_valid ? 0 : 2;
}

int cmd_simulate(const std::string& spec_path, std::uint64_t seed, bool seed_given,
                 std::int64_t t_max, const std::vector<int>& starts_policy,
                 std::vector<double> eps, double early_stop, const std::string& out_dir,
                 bool dump_graph) {
    const auto loaded = nbrw::model::spec_from_json(read_json_file(spec_path));
    if (loaded.had_seed && !seed_given) seed = loaded.seed;
    const auto validation = nbrw::model::validate_spec(loaded.spec);
    if (!validation.model_valid) {
        for (const auto& e : validation.errors) std::cerr << "invalid spec: " << e << "\n";
        return 2;
    }
    const auto st = nbrw::theory::compute_stats(loaded.spec);
    const auto pr = nbrw::theory::predict(st);
    std::sort(eps.begin(), eps.end());
    if (t_max <= 0) t_max = nbrw::theory::default_t_max(st, pr, eps.front());

    const auto g = nbrw::model::generate_graph(loaded.spec, seed);
    const auto op = nbrw::walk::build_operator(g);
    const auto starts = nbrw::walk::draw_starts(op, seed, starts_policy[0], starts_policy[1],
                                                starts_policy[2]);
    nbrw::walk::ProfileOptions opt;
    opt.early_stop_eps = early_stop;
    const auto prof = nbrw::walk::distance_profile(op, starts, t_max, opt);

    fs::create_directories(out_dir);
    {
        std::ostringstream csv;
        csv << "start,t,tv\n";
        for (std::size_t si = 0; si < starts.size(); ++si)
            for (std::size_t t = 0; t < prof.per_start[si].size(); ++t)
                csv << starts[si] << ',' << t << ','
                    << nbrw::harness::detail::fmt_csv(prof.per_start[si][t]) << "\n";
        write_text_file(fs::path(out_dir) / "profile.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "t,tv\n";
        for (std::size_t t = 0; t < prof.aggregate.size(); ++t)
            csv << t << ',' << nbrw::harness::detail::fmt_csv(prof.aggregate[t]) << "\n";
        write_text_file(fs::path(out_dir) / "aggregate.csv", csv.str());
    }
    json tmix = json::object();
    for (double e : eps) {
        const auto est = nbrw::walk::estimate_tmix(prof.aggregate, e);
        tmix[nbrw::harness::detail::fmt_g(e)] = json{{"t", est.t}, {"censored", est.censored}};
    }
    json side{{"spec_hash", nbrw::model::spec_hash(loaded.spec)},
              {"seed", seed},
              {"t_max", t_max},
              {"starts", starts},
              {"validation", validation_to_json(validation)},
              {"stats", stats_to_json(st)},
              {"prediction", prediction_to_json(pr, eps)},
              {"tmix", std::move(tmix)}};
    write_text_file(fs::path(out_dir) / "simulate.json", side.dump(2) + "\n");
    if (dump_graph) {
        json dump{{"spec", nbrw::model::spec_to_json(loaded.spec)},
                  {"seed", seed},
                  {"eta", g.eta}};
        write_text_file(fs::path(out_dir) / "graph.json", dump.dump() + "\n");
    }
    std::cerr << "simulate: wrote " << out_dir << "/profile.csv, aggregate.csv, simulate.json"
              << (dump_graph ? ", graph.json" : "") << "\n";
    return 0;
}

int cmd_experiment(const std::string& plan_path, const std::string& out_dir, int threads,
                   std::uint64_t master_seed, bool master_seed_given) {
    auto plan = nbrw::harness::plan_from_json(read_json_file(plan_path));
    if (master_seed_given) plan.master_seed = master_seed;
    fs::create_directories(out_dir);
    const fs::path store_path = fs::path(out_dir) / "results.jsonl";

    nbrw::harness::SkipSet done;
    std::vector<json> existing;
    bool fresh = true;
    if (fs::exists(store_path)) {
        std::ifstream in(store_path);
        auto store = nbrw::harness::load_store(in);
        for (const auto& d : store.diagnostics) std::cerr << "results.jsonl: " << d << "\n";
        if (!store.ok) {
            std::cerr << "experiment: existing store has conflicts, not merging\n";
            return 2;
        }
        if (store.header.is_null()) {
            std::cerr << "experiment: existing store has no header, not merging\n";
            return 2;
        }
        const auto fp = store.header.value("plan_fingerprint", "");
        if (fp != nbrw::harness::plan_fingerprint(plan)) {
            std::cerr << "experiment: plan fingerprint " << nbrw::harness::plan_fingerprint(plan)
                      << " does not match existing store " << fp << ", not merging\n";
            return 2;
        }
        for (const auto& r : store.records)
            done.insert({r.at("cell").get<std::string>(), r.at("replicate").get<int>()});
        existing = std::move(store.records);
        fresh = false;
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto progress = [&](std::size_t d, std::size_t total) {
        if (total >= 20 && d % (total / 20) != 0 && d != total) return;
        std::cerr << "experiment: " << d << "/" << total << " replicates\n";
    };
    auto records = nbrw::harness::run_experiment(plan, threads, progress, &done);
    const auto t1 = std::chrono::steady_clock::now();

    {
        std::ofstream out(store_path, std::ios::app);
        if (!out) throw std::runtime_error("cannot write " + store_path.string());
        if (fresh) out << nbrw::harness::store_header(plan).dump() << "\n";
        for (const auto& r : records) out << r.dump() << "\n";
    }
    std::vector<json> all = std::move(existing);
    for (auto& r : records) all.push_back(std::move(r));
    std::size_t rejected = 0;
    for (const auto& r : all) rejected += r.contains("rejected") ? 1 : 0;
    const auto summary = nbrw::harness::summarize(plan.kind, all);
    write_text_file(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");

    std::cerr << "experiment: " << all.size() << " records (" << rejected << " rejected, "
              << done.size() << " reused) in "
              << std::chrono::duration<double>(t1 - t0).count() << " s\n";
    std::cout << json{{"kind", plan.kind},
                      {"fingerprint", nbrw::harness::plan_fingerprint(plan)},
                      {"records", all.size()},
                      {"rejected", rejected},
                      {"results", store_path.string()},
                      {"summary", (fs::path(out_dir) / "summary.json").string()}}
                     .dump(2)
              << "\n";
    return 0;
}

int cmd_report(const std::string& in_dir, const std::string& format, std::string out_dir) {
    const fs::path store_path = fs::path(in_dir) / "results.jsonl";
    std::ifstream in(store_path);
    if (!in) {
        std::cerr << "report: cannot open " << store_path << "\n";
        return 2;
    }
    auto store = nbrw::harness::load_store(in);
    for (const auto& d : store.diagnostics) std::cerr << "results.jsonl: " << d << "\n";
    if (!store.ok || store.header.is_null()) {
        std::cerr << "report: store is unusable\n";
        return 2;
    }
    const std::string kind = store.header.value("kind", "");
    const auto summary = nbrw::harness::summarize(kind, store.records);
    if (format == "json") {
        std::cout << summary.dump(2) << "\n";
        return 0;
    }
    if (out_dir.empty()) out_dir = in_dir;
    fs::create_directories(out_dir);
    std::ostringstream profile_csv, tmix_csv;
    nbrw::harness::export_profile_csv(summary, profile_csv);
    nbrw::harness::export_tmix_csv(summary, tmix_csv);
    write_text_file(fs::path(out_dir) / "profile.csv", profile_csv.str());
    write_text_file(fs::path(out_dir) / "tmix.csv", tmix_csv.str());
    std::cerr << "report: wrote " << out_dir << "/profile.csv and tmix.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-backtracking walk mixing on two-community pairing models"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "evolve exact distances on one sampled graph");
    std::string sim_spec, sim_out;
    std::uint64_t sim_seed = 1;
    std::int64_t sim_t_max = 0;
    std::vector<int> sim_starts{16, 8, 8};
    std::vector<double> sim_eps{0.25, 0.5, 0.75};
    double sim_early = 0.0;
    bool sim_dump = false;
    sim->add_option("--spec", sim_spec, "spec JSON file")->required()->check(CLI::ExistingFile);
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "graph seed (default: spec's, else 1)");
    sim->add_option("--t-max", sim_t_max, "horizon; 0 picks a regime-based default");
    sim->add_option("--starts", sim_starts, "start counts: uniform,side0,side1")
        ->delimiter(',')
        ->expected(3);
    sim->add_option("--eps", sim_eps, "thresholds for mixing times")->delimiter(',');
    sim->add_option("--early-stop", sim_early, "stop a start's curve below this value (0: never)");
    sim->add_option("--out", sim_out, "output directory")->required();
    sim->add_flag("--dump-graph", sim_dump, "also write the pairing as graph.json");

    // predict
    auto* pre = app.add_subcommand("predict", "closed-form predictions for a spec");
    std::string pre_spec;
    std::vector<double> pre_eps{0.25, 0.5, 0.75};
    pre->add_option("--spec", pre_spec, "spec JSON file")->required()->check(CLI::ExistingFile);
    pre->add_option("--eps", pre_eps, "thresholds for predicted mixing times")->delimiter(',');

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a plan and append to a results store");
    std::string exp_plan, exp_out;
    int exp_threads = 1;
    std::uint64_t exp_seed = 0;
    exp->add_option("--plan", exp_plan, "plan JSON file")->required()->check(CLI::ExistingFile);
    exp->add_option("--out", exp_out, "output directory")->required();
    exp->add_option("--threads", exp_threads, "worker threads")->check(CLI::PositiveNumber);
    auto* exp_seed_opt = exp->add_option("--master-seed", exp_seed, "override the plan's master seed");

    // report
    auto* rep = app.add_subcommand("report", "aggregate a results store");
    std::string rep_in, rep_out, rep_format = "csv";
    rep->add_option("--in", rep_in, "directory containing results.jsonl")->required();
    rep->add_option("--format", rep_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    rep->add_option("--out", rep_out, "output directory for csv (default: --in)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(sim_spec, sim_seed, sim_seed_opt->count() > 0, sim_t_max,
                                sim_starts, sim_eps, sim_early, sim_out, sim_dump);
        if (pre->parsed()) return cmd_predict(pre_spec, pre_eps);
        if (exp->parsed())
            return cmd_experiment(exp_plan, exp_out, exp_threads, exp_seed,
                                  exp_seed_opt->count() > 0);
        if (rep->parsed()) return cmd_report(rep_in, rep_format, rep_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
