// Seedable RNG with named substreams.
//
// Identity: every stream is a std::mt19937_64 whose seed is produced by the
// SplitMix64 finalizer over (master_seed, stream tags...).  Tags are folded in
// one at a time, so derive_seed(m, a, b) != derive_seed(m, b, a).  All sampling
// helpers (bounded ints, unit doubles, shuffles) are implemented here on top of
// raw 64-bit draws instead of std:: distributions, so sequences are identical
// across standard libraries and platforms.

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace nbrw {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    return mix64(mix64(master) ^ mix64(tag ^ 0xA3C59AC2F0B2D1E4ull));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(master, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    return derive_seed(derive_seed(master, a, b), c);
}

// Substream tags for graph generation phases.  Fixed numbering is part of the
// determinism contract: same (spec, seed) must give a bit-identical pairing.
enum class Stream : std::uint64_t {
    outgoing_h0 = 1,
    outgoing_h1 = 2,
    internal_h0 = 3,
    internal_h1 = 4,
    crossing = 5,
    degrees = 6,
    starts = 7,
    trajectory = 8,
};

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    Rng(std::uint64_t master, Stream s) : eng_(derive_seed(master, static_cast<std::uint64_t>(s))) {}

    std::uint64_t next_u64() { return eng_(); }

    // Unbiased integer in [0, n) by rejection on the top of the 64-bit range.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n == 0");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v = eng_();
        while (v >= limit) v = eng_();
        return v % n;
    }

    // 53-bit mantissa double in [0, 1).
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Fisher-Yates prefix: after the call v[0..k) is a uniform k-subset in
    // uniform order.
    template <class T>
    void partial_shuffle(std::vector<T>& v, std::size_t k) {
        if (k > v.size()) throw std::invalid_argument("Rng::partial_shuffle: k > size");
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(v.size() - i));
            std::swap(v[i], v[j]);
        }
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace nbrw
