// Two-community degree specification: explicit degree sequences per community
// plus the number p of crossing pairs.  Validation, degree-law sampling, JSON
// round-trip and a canonical content hash live here.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"
#include "nbrw/hash.hpp"
#include "nbrw/rng.hpp"

namespace nbrw::model {

struct CommunitySpec {
    std::vector<int> degrees_0;
    std::vector<int> degrees_1;
    std::int64_t p = 0;

    std::int64_t half_edges(int side) const {
        const auto& d = side == 0 ? degrees_0 : degrees_1;
        return std::accumulate(d.begin(), d.end(), std::int64_t{0});
    }
    std::int64_t total_half_edges() const { return half_edges(0) + half_edges(1); }
};

// alpha = p/N0 + p/N1 summarises the crossing fraction; regime hints compare
// c = alpha * log N against these thresholds.
struct RegimeThresholds {
    double cutoff = 10.0;
    double no_cutoff = 0.1;
};

inline std::string classify_regime(double c, const RegimeThresholds& th) {
    if (c >= th.cutoff) return "cutoff-regime";
    if (c <= th.no_cutoff) return "no-cutoff-regime";
    return "critical";
}

struct ValidationReport {
    bool model_valid = false;
    bool asymptotic_regime = false;
    std::vector<std::string> errors;        // why model_valid is false
    std::vector<std::string> asymptotic_notes; // why asymptotic_regime is false
    double alpha0 = 0.0, alpha1 = 0.0, alpha = 0.0;
    double c = 0.0;  // alpha * log N
    std::string regime_hint;
    RegimeThresholds thresholds;
};

// Model validity: all degrees >= 2, both half-edge counts even and positive,
// p even with 2 <= p <= min(N0, N1).  Asymptotic regime additionally needs
// minimum degree >= 3 and alpha <= 1.
inline ValidationReport validate_spec(const CommunitySpec& spec,
                                      const RegimeThresholds& th = {}) {
    ValidationReport rep;
    rep.thresholds = th;
    const std::int64_t n0 = spec.half_edges(0);
    const std::int64_t n1 = spec.half_edges(1);

    int min_deg = std::numeric_limits<int>::max();
    for (int side = 0; side < 2; ++side) {
        const auto& deg = side == 0 ? spec.degrees_0 : spec.degrees_1;
        if (deg.empty())
            rep.errors.push_back("community " + std::to_string(side) + " has no vertices");
        for (int d : deg) {
            min_deg = std::min(min_deg, d);
            if (d < 2) {
                rep.errors.push_back("degree " + std::to_string(d) + " < 2 in community " +
                                     std::to_string(side));
                break;
            }
        }
    }
    if (n0 % 2 != 0) rep.errors.push_back("N0 = " + std::to_string(n0) + " is odd");
    if (n1 % 2 != 0) rep.errors.push_back("N1 = " + std::to_string(n1) + " is odd");
    if (spec.p % 2 != 0) rep.errors.push_back("p = " + std::to_string(spec.p) + " is odd");
    if (spec.p < 2) rep.errors.push_back("p < 2");
    if (spec.p > std::min(n0, n1))
        rep.errors.push_back("p exceeds min(N0, N1) = " + std::to_string(std::min(n0, n1)));

    rep.model_valid = rep.errors.empty();
    if (n0 > 0 && n1 > 0) {
        rep.alpha0 = static_cast<double>(spec.p) / static_cast<double>(n0);
        rep.alpha1 = static_cast<double>(spec.p) / static_cast<double>(n1);
        rep.alpha = rep.alpha0 + rep.alpha1;
        rep.c = rep.alpha * std::log(static_cast<double>(n0 + n1));
        rep.regime_hint = classify_regime(rep.c, th);
    }

    rep.asymptotic_regime = rep.model_valid;
    if (rep.model_valid) {
        if (min_deg < 3) {
            rep.asymptotic_regime = false;
            rep.asymptotic_notes.push_back("minimum degree " + std::to_string(min_deg) + " < 3");
        }
        if (rep.alpha > 1.0) {
            rep.asymptotic_regime = false;
            rep.asymptotic_notes.push_back("alpha = " + std::to_string(rep.alpha) + " > 1");
        }
    }
    return rep;
}

// FNV-1a over a canonical byte rendering; identifies spec content in result
// records and sidecar files.
inline std::string spec_hash(const CommunitySpec& spec) {
    Fnv1a h;
    h.eat_i64(static_cast<std::int64_t>(spec.degrees_0.size()));
    for (int d : spec.degrees_0) h.eat_i64(d);
    h.eat_i64(static_cast<std::int64_t>(spec.degrees_1.size()));
    for (int d : spec.degrees_1) h.eat_i64(d);
    h.eat_i64(spec.p);
    return h.hex();
}

// Discrete degree law with support in {3, ..., Delta}.  Used to materialise
// test and experiment degree sequences; explicit sequences bypass it.
struct DegreeLaw {
    std::vector<std::pair<int, double>> atoms;  // (degree, probability)

    void validate() const {
        if (atoms.empty()) throw std::invalid_argument("degree law: empty support");
        double sum = 0.0;
        for (auto [d, q] : atoms) {
            if (d < 3) throw std::invalid_argument("degree law: support value < 3");
            if (q <= 0.0) throw std::invalid_argument("degree law: non-positive probability");
            sum += q;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("degree law: probabilities sum to " + std::to_string(sum));
    }

    double mean() const {
        double m = 0.0;
        for (auto [d, q] : atoms) m += d * q;
        return m;
    }

    bool parity_reachable(std::int64_t n) const {
        bool has_even = false, has_odd = false;
        for (auto [d, q] : atoms) ((d % 2 == 0) ? has_even : has_odd) = true;
        if (has_even && has_odd) return true;
        if (has_even) return true;          // all even: any n works
        return n % 2 == 0;                  // all odd: need even n
    }
};

inline DegreeLaw degree_law_from_json(const nlohmann::json& j) {
    DegreeLaw law;
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            law.atoms.emplace_back(std::stoi(it.key()), it.value().get<double>());
    } else if (j.is_array()) {
        for (const auto& pair : j)
            law.atoms.emplace_back(pair.at(0).get<int>(), pair.at(1).get<double>());
    } else {
        throw std::invalid_argument("degree law: expected object {\"3\": 0.5, ...} or array of pairs");
    }
    std::sort(law.atoms.begin(), law.atoms.end());
    law.validate();
    return law;
}

// n i.i.d. draws from the law; if the sum comes out odd, one uniformly chosen
// entry is redrawn until parity holds, capped at 1000 attempts.
inline std::vector<int> sample_degree_sequence(const DegreeLaw& law, std::int64_t n, Rng& rng) {
    law.validate();
    if (n <= 0) throw std::invalid_argument("sample_degree_sequence: n_vertices == 0");
    if (!law.parity_reachable(n))
        throw std::runtime_error("sample_degree_sequence: parity-unreachable for n = " +
                                 std::to_string(n));
    std::vector<double> cdf;
    cdf.reserve(law.atoms.size());
    double acc = 0.0;
    for (auto [d, q] : law.atoms) cdf.push_back(acc += q);
    cdf.back() = 1.0;
    auto draw = [&]() {
        const double u = rng.unit();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        return law.atoms[static_cast<std::size_t>(it - cdf.begin())].first;
    };

    std::vector<int> deg(static_cast<std::size_t>(n));
    std::int64_t sum = 0;
    for (auto& d : deg) sum += (d = draw());
    int attempts = 0;
    while (sum % 2 != 0) {
        if (++attempts > 1000)
            throw std::runtime_error("sample_degree_sequence: parity-unreachable (1000 resamples)");
        const auto i = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)));
        sum -= deg[i];
        sum += (deg[i] = draw());
    }
    return deg;
}

inline std::vector<int> sample_degree_sequence(const DegreeLaw& law, std::int64_t n,
                                               std::uint64_t seed) {
    Rng rng(seed, Stream::degrees);
    return sample_degree_sequence(law, n, rng);
}

// Spec file: {"degrees_0": [...] | "degree_law_0": {...}, "n_0": int, same for
// side 1, "p": int, "seed": int}.  Laws are materialised with the file seed
// (side tag keeps the two communities on distinct substreams).
struct LoadedSpec {
    CommunitySpec spec;
    std::uint64_t seed = 0;
    bool had_seed = false;
};

inline LoadedSpec spec_from_json(const nlohmann::json& j) {
    LoadedSpec out;
    if (j.contains("seed")) {
        out.seed = j.at("seed").get<std::uint64_t>();
        out.had_seed = true;
    }
    for (int side = 0; side < 2; ++side) {
        const std::string deg_key = side == 0 ? "degrees_0" : "degrees_1";
        const std::string law_key = side == 0 ? "degree_law_0" : "degree_law_1";
        const std::string n_key = side == 0 ? "n_0" : "n_1";
        auto& target = side == 0 ? out.spec.degrees_0 : out.spec.degrees_1;
        if (j.contains(deg_key)) {
            target = j.at(deg_key).get<std::vector<int>>();
        } else if (j.contains(law_key)) {
            if (!j.contains(n_key))
                throw std::invalid_argument("spec: " + law_key + " requires " + n_key);
            const DegreeLaw law = degree_law_from_json(j.at(law_key));
            Rng rng(derive_seed(out.seed, static_cast<std::uint64_t>(Stream::degrees),
                                static_cast<std::uint64_t>(side)));
            target = sample_degree_sequence(law, j.at(n_key).get<std::int64_t>(), rng);
        } else {
            throw std::invalid_argument("spec: need " + deg_key + " or " + law_key);
        }
    }
    out.spec.p = j.at("p").get<std::int64_t>();
    return out;
}

inline nlohmann::json spec_to_json(const CommunitySpec& spec) {
    return nlohmann::json{{"degrees_0", spec.degrees_0},
                          {"degrees_1", spec.degrees_1},
                          {"p", spec.p}};
}

}  // namespace nbrw::model
