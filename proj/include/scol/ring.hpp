#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "scol/errors.hpp"

namespace scol {

// Residue in Z_{2^64}. All arithmetic wraps; the signed interpretation is
// two's complement ([2^63, 2^64) is negative).
using RingElement = std::uint64_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

inline RingElement ring_add(RingElement a, RingElement b) { return a + b; }
inline RingElement ring_sub(RingElement a, RingElement b) { return a - b; }
inline RingElement ring_mul(RingElement a, RingElement b) { return a * b; }
inline RingElement ring_neg(RingElement a) { return ~a + 1; }

inline i64 ring_to_signed(RingElement a) { return static_cast<i64>(a); }
inline RingElement ring_from_signed(i64 a) { return static_cast<u64>(a); }

// Embeds reals into the ring at scale base^frac_digits.
struct FixedPointCodec {
    int base = 10;
    int frac_digits = 5;
    u64 scale = 100000;          // base^frac_digits
    double max_magnitude = 0.0;  // defaults to 2^40 / scale

    FixedPointCodec() { *this = FixedPointCodec(10, 5); }

    FixedPointCodec(int base_, int frac_digits_) : base(base_), frac_digits(frac_digits_) {
        if (frac_digits < 1) throw RangeError("frac_digits must be >= 1");
        scale = 1;
        for (int i = 0; i < frac_digits; ++i) scale *= static_cast<u64>(base);
        max_magnitude = std::ldexp(1.0, 40) / static_cast<double>(scale);
    }

    // round(x * scale), half away from zero, two's-complement embedding.
    RingElement encode(double x) const {
        if (!(std::fabs(x) <= max_magnitude))
            throw RangeError("fixed-point encode out of range");
        double scaled = x * static_cast<double>(scale);
        i64 v = static_cast<i64>(scaled >= 0 ? std::floor(scaled + 0.5) : std::ceil(scaled - 0.5));
        return ring_from_signed(v);
    }

    // Signed interpretation divided by scale^scale_exponent.
    double decode(RingElement e, int scale_exponent = 1) const {
        double s = 1.0;
        for (int i = 0; i < scale_exponent; ++i) s *= static_cast<double>(scale);
        return static_cast<double>(ring_to_signed(e)) / s;
    }
};

// Little-endian helpers shared by the wire format and all file formats.
inline void put_le64(std::vector<std::uint8_t>& out, u64 v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline u64 get_le64(const std::uint8_t* p) {
    u64 v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<u64>(p[i]) << (8 * i);
    return v;
}
inline std::uint32_t get_le32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace scol
