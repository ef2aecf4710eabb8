// FNV-1a content hashing for spec and plan fingerprints.

#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace nbrw {

class Fnv1a {
  public:
    void eat_byte(unsigned char b) {
        h_ ^= b;
        h_ *= 0x100000001b3ull;
    }
    void eat_i64(std::int64_t v) {
        for (int i = 0; i < 8; ++i) eat_byte(static_cast<unsigned char>(v >> (8 * i)));
    }
    void eat_bytes(std::string_view s) {
        for (unsigned char b : s) eat_byte(b);
    }
    std::uint64_t value() const { return h_; }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
        return std::string(buf);
    }

  private:
    std::uint64_t h_ = 0xcbf29ce484222325ull;
};

inline std::string fnv1a_hex(std::string_view s) {
    Fnv1a h;
    h.eat_bytes(s);
    return h.hex();
}

}  // namespace nbrw
