#include <cmath>
#include <random>

#include "doctest.h"
#include "scol/ring.hpp"

using namespace scol;

TEST_CASE("ring arithmetic wraps mod 2^64") {
    CHECK(ring_add(UINT64_MAX, 1) == 0);
    CHECK(ring_sub(0, 1) == UINT64_MAX);
    CHECK(ring_mul(1ull << 32, 1ull << 32) == 0);
    CHECK(ring_neg(5) == ring_from_signed(-5));
    CHECK(ring_to_signed(ring_from_signed(-12345)) == -12345);
    CHECK(ring_to_signed(UINT64_MAX) == -1);
}

TEST_CASE("default codec parameters") {
    FixedPointCodec c;
    CHECK(c.base == 10);
    CHECK(c.frac_digits == 5);
    CHECK(c.scale == 100000);
    CHECK(c.max_magnitude == doctest::Approx(std::ldexp(1.0, 40) / 100000.0));
}

TEST_CASE("encode matches llround oracle across a sweep") {
    FixedPointCodec c;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-c.max_magnitude, c.max_magnitude);
    for (int i = 0; i < 20000; ++i) {
        double x = dist(rng);
        i64 expect = std::llround(x * 1e5);  // llround is half away from zero
        CHECK(ring_to_signed(c.encode(x)) == expect);
    }
}

TEST_CASE("half-away-from-zero ties") {
    FixedPointCodec c;
    CHECK(ring_to_signed(c.encode(0.000005)) == 1);
    CHECK(ring_to_signed(c.encode(-0.000005)) == -1);
    CHECK(ring_to_signed(c.encode(0.000015)) == 2);
    CHECK(ring_to_signed(c.encode(-0.000015)) == -2);
    CHECK(ring_to_signed(c.encode(0.0)) == 0);
}

TEST_CASE("decode inverts encode within codec resolution") {
    FixedPointCodec c;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-c.max_magnitude, c.max_magnitude);
    for (int i = 0; i < 20000; ++i) {
        double x = dist(rng);
        // 0.5 ulp from rounding plus double noise in x*scale near 2^40
        CHECK(std::fabs(c.decode(c.encode(x)) - x) <= 0.51 / 1e5);
    }
    // scale_exponent 2 divides by scale twice
    CHECK(c.decode(c.encode(2.5) * c.encode(2.0), 2) == doctest::Approx(5.0));
}

TEST_CASE("encode range check") {
    FixedPointCodec c;
    CHECK_NOTHROW(c.encode(c.max_magnitude));
    CHECK_THROWS_AS(c.encode(c.max_magnitude * 1.0001), RangeError);
    CHECK_THROWS_AS(c.encode(-c.max_magnitude * 1.0001), RangeError);
    CHECK_THROWS_AS(c.encode(std::nan("")), RangeError);
}

TEST_CASE("base-2 codec") {
    FixedPointCodec c(2, 16);
    CHECK(c.scale == 65536);
    CHECK(c.max_magnitude == doctest::Approx(std::ldexp(1.0, 24)));
    CHECK(ring_to_signed(c.encode(1.5)) == 98304);
    CHECK(c.decode(c.encode(-3.25)) == doctest::Approx(-3.25));
}

TEST_CASE("little-endian helpers round trip") {
    std::vector<std::uint8_t> buf;
    put_le64(buf, 0x0102030405060708ull);
    put_le32(buf, 0xAABBCCDDu);
    REQUIRE(buf.size() == 12);
    CHECK(buf[0] == 0x08);
    CHECK(buf[7] == 0x01);
    CHECK(get_le64(buf.data()) == 0x0102030405060708ull);
    CHECK(get_le32(buf.data() + 8) == 0xAABBCCDDu);
}
