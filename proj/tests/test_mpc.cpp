#include <cmath>
#include <random>

#include "doctest.h"
#include "scol/dealer.hpp"
#include "scol/mpc.hpp"
#include "test_util.hpp"

using namespace scol;

namespace {

struct Rig {
    FixedPointCodec codec;
    Dealer dealer;
    OnDemandPool pool;
    InProcNet net;
    SecureSession s;

    explicit Rig(u64 seed = 1, int parties = 2, FixedPointCodec c = FixedPointCodec{})
        : codec(c),
          dealer(parties, c, seed),
          pool(dealer, RandomnessBudget{}, /*enforce=*/false),
          net(parties),
          s(parties, c, &pool, &net, seed ^ 0x5eedull) {}
};

Tensor randt(std::vector<std::uint32_t> shape, u64 seed, double lo = -8.0, double hi = 8.0) {
    Tensor t(std::move(shape));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : t.data) v = dist(rng);
    return t;
}

// floor division on the signed interpretation (rounds toward minus infinity)
i64 floor_div(i64 num, i64 den) {
    i64 q = num / den;
    if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
    return q;
}

}  // namespace

TEST_CASE("open agrees with reconstruct and costs one round") {
    Rig r(11);
    Tensor x = randt({4, 4}, 1);
    SharedTensor sh = share(r.s, x);
    u64 rounds_before = r.net.stats(0).total_rounds();
    auto vals = open(r.s, sh);
    CHECK(r.net.stats(0).total_rounds() == rounds_before + 1);
    CHECK(vals == reconstruct_ring(sh));
}

TEST_CASE("affine share algebra") {
    Rig r(12);
    Tensor x = randt({3, 5}, 2), y = randt({3, 5}, 3);
    // compare against the quantized inputs; linear ops add no further error
    for (auto& v : x.data) v = r.codec.decode(r.codec.encode(v));
    for (auto& v : y.data) v = r.codec.decode(r.codec.encode(v));
    SharedTensor sx = share(r.s, x), sy = share(r.s, y);

    Tensor sum = reconstruct(r.s, add_shared(sx, sy));
    Tensor diff = reconstruct(r.s, sub_shared(sx, sy));
    Tensor scaled = reconstruct(r.s, mul_public_int(sx, -3));
    Tensor neg = reconstruct(r.s, neg_shared(sx));
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(sum.data[i] == doctest::Approx(x.data[i] + y.data[i]).epsilon(1e-9));
        CHECK(diff.data[i] == doctest::Approx(x.data[i] - y.data[i]).epsilon(1e-9));
        CHECK(scaled.data[i] == doctest::Approx(-3.0 * x.data[i]).epsilon(1e-9));
        CHECK(neg.data[i] == doctest::Approx(-x.data[i]).epsilon(1e-9));
    }

    Tensor pub = reconstruct(r.s, add_public(r.s, sx, y));
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(pub.data[i] == doctest::Approx(x.data[i] + y.data[i]).epsilon(1e-6));

    SharedTensor st = transpose_shared(sx);
    Tensor xt = reconstruct(r.s, st);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(xt.data[j * 3 + i] == doctest::Approx(x.data[i * 5 + j]));

    Tensor summed = reconstruct(r.s, sum_rows(sx));
    for (std::size_t j = 0; j < 5; ++j) {
        double expect = 0;
        for (std::size_t i = 0; i < 3; ++i) expect += x.data[i * 5 + j];
        CHECK(summed.data[j] == doctest::Approx(expect).epsilon(1e-9));
    }

    Tensor row = randt({5}, 4);
    for (auto& v : row.data) v = r.codec.decode(r.codec.encode(v));
    SharedTensor srow = share(r.s, row);
    Tensor bc = reconstruct(r.s, add_row_broadcast(sx, srow));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(bc.data[i * 5 + j] == doctest::Approx(x.data[i * 5 + j] + row.data[j]).epsilon(1e-9));
}

TEST_CASE("concat of shares") {
    Rig r(13);
    Tensor a = randt({2, 3}, 5), b = randt({4, 3}, 6), c = randt({2, 2}, 7);
    SharedTensor sa = share(r.s, a), sb = share(r.s, b), sc = share(r.s, c);
    Tensor v = reconstruct(r.s, concat_shared({&sa, &sb}, 0));
    REQUIRE(v.shape == std::vector<std::uint32_t>{6, 3});
    for (std::size_t i = 0; i < 6; ++i) CHECK(v.data[i] == doctest::Approx(a.data[i]));
    for (std::size_t i = 0; i < 12; ++i) CHECK(v.data[6 + i] == doctest::Approx(b.data[i]));

    Tensor h = reconstruct(r.s, concat_shared({&sa, &sc}, 1));
    REQUIRE(h.shape == std::vector<std::uint32_t>{2, 5});
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 3; ++j) CHECK(h.data[i * 5 + j] == doctest::Approx(a.data[i * 3 + j]));
        for (std::size_t j = 0; j < 2; ++j) CHECK(h.data[i * 5 + 3 + j] == doctest::Approx(c.data[i * 2 + j]));
    }
    CHECK_THROWS_AS(concat_shared({&sa, &sc}, 0), ShapeError);
    CHECK_THROWS_AS(concat_shared({&sa, &sb}, 1), ShapeError);
}

TEST_CASE("Beaver multiplication matches the plaintext product exactly at scale_exponent 2") {
    Rig r(14);
    Tensor x = randt({64}, 8), y = randt({64}, 9);
    SharedTensor sx = share(r.s, x), sy = share(r.s, y);
    SharedTensor sz = mul_secure(r.s, sx, sy);
    CHECK(sz.scale_exponent == 2);
    // At scale_exponent 2 the ring value is the exact product of encodings.
    auto got = reconstruct_ring(sz);
    for (std::size_t i = 0; i < 64; ++i)
        CHECK(got[i] == r.codec.encode(x.data[i]) * r.codec.encode(y.data[i]));
}

TEST_CASE("triple reuse is rejected") {
    Rig r(15);
    Tensor x = randt({8}, 10), y = randt({8}, 11);
    SharedTensor sx = share(r.s, x), sy = share(r.s, y);
    BeaverTriple t = r.dealer.gen_beaver(8);
    CHECK_NOTHROW(mul_beaver(r.s, sx, sy, t));
    CHECK_THROWS_AS(mul_beaver(r.s, sx, sy, t), ProtocolError);

    TruncationPair p = r.dealer.gen_trunc_pair(8);
    SharedTensor prod = mul_secure(r.s, sx, sy);
    CHECK_NOTHROW(truncate(r.s, prod, p));
    CHECK_THROWS_AS(truncate(r.s, prod, p), ProtocolError);

    ComparisonTuple c = r.dealer.gen_cmp_tuple(8);
    CHECK_NOTHROW(msb(r.s, sx, c));
    CHECK_THROWS_AS(msb(r.s, sx, c), ProtocolError);
}

TEST_CASE("truncation is an exact floor of the signed quotient") {
    Rig r(16);
    // adversarial ring values: near zero, near the offset boundaries, random
    std::vector<i64> vals = {0, 1, -1, 49999, 50000, 50001, -49999, -50000, -50001,
                             99999, 100000, 100001, -100000, (1ll << 62) - 7, -(1ll << 62) + 7};
    std::mt19937_64 rng(77);
    for (int i = 0; i < 200; ++i) vals.push_back(static_cast<i64>(rng() >> 2) * (i % 2 ? 1 : -1));
    std::vector<RingElement> ring(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) ring[i] = ring_from_signed(vals[i]);

    SharedTensor t = share_ring(r.s, ring, {static_cast<std::uint32_t>(ring.size())}, 2);
    SharedTensor res = truncate_secure(r.s, t);
    CHECK(res.scale_exponent == 1);
    auto got = reconstruct_ring(res);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        i64 expect = floor_div(vals[i], static_cast<i64>(r.codec.scale));
        CHECK(ring_to_signed(got[i]) == expect);
    }
}

TEST_CASE("truncation after multiply keeps products within one ulp") {
    Rig r(17);
    Tensor x = randt({128}, 20), y = randt({128}, 21);
    for (auto& v : x.data) v = r.codec.decode(r.codec.encode(v));
    for (auto& v : y.data) v = r.codec.decode(r.codec.encode(v));
    SharedTensor sx = share(r.s, x), sy = share(r.s, y);
    SharedTensor sz = mul_fixed(r.s, sx, sy);
    Tensor z = reconstruct(r.s, sz);
    // exact floor of the exact product: error strictly below one ulp
    for (std::size_t i = 0; i < 128; ++i)
        CHECK(std::fabs(z.data[i] - x.data[i] * y.data[i]) < 1.0 / 1e5 + 1e-9);
}

TEST_CASE("chunked truncation matches the unchunked result") {
    Rig r(18);
    std::vector<RingElement> ring(9000);
    std::mt19937_64 rng(5);
    for (auto& v : ring) v = ring_from_signed(static_cast<i64>(rng() >> 3) - (1ll << 60));
    SharedTensor t = share_ring(r.s, ring, {9000}, 2);
    auto got = reconstruct_ring(truncate_secure(r.s, t));
    for (std::size_t i = 0; i < ring.size(); ++i)
        CHECK(ring_to_signed(got[i]) == floor_div(ring_to_signed(ring[i]), 100000));
}

TEST_CASE("secure matmul with rescale matches double-precision matmul") {
    Rig r(19);
    Tensor x = randt({6, 9}, 30, -2.0, 2.0), y = randt({9, 5}, 31, -2.0, 2.0);
    for (auto& v : x.data) v = r.codec.decode(r.codec.encode(v));
    for (auto& v : y.data) v = r.codec.decode(r.codec.encode(v));
    SharedTensor sx = share(r.s, x), sy = share(r.s, y);
    SharedTensor sz = matmul_fixed(r.s, sx, sy);
    Tensor z = reconstruct(r.s, sz);
    Tensor expect = matmul(x, y);
    REQUIRE(z.shape == expect.shape);
    // one floor at the end: error below one ulp regardless of inner dim
    for (std::size_t i = 0; i < z.size(); ++i)
        CHECK(std::fabs(z.data[i] - expect.data[i]) < 1.0 / 1e5 + 1e-9);
}

TEST_CASE("msb computes the sign bit") {
    Rig r(20);
    std::vector<i64> vals = {0, 1, -1, 2, -2, 100000, -100000, (1ll << 62), -(1ll << 62),
                             INT64_MAX, INT64_MIN, INT64_MIN + 1};
    std::mt19937_64 rng(9);
    for (int i = 0; i < 500; ++i) vals.push_back(static_cast<i64>(rng()));
    std::vector<RingElement> ring(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) ring[i] = ring_from_signed(vals[i]);
    SharedTensor t = share_ring(r.s, ring, {static_cast<std::uint32_t>(ring.size())}, 1);
    ComparisonTuple tuple = r.dealer.gen_cmp_tuple(ring.size());
    auto got = reconstruct_ring(msb(r.s, t, tuple));
    for (std::size_t i = 0; i < vals.size(); ++i) CHECK(got[i] == (vals[i] < 0 ? 1u : 0u));
}

TEST_CASE("relu is exact and caches the positive indicator") {
    Rig r(21);
    std::vector<double> vals = {-3.5, -0.00001, 0.0, 0.00001, 0.5, 2.75, -8.0, 8.0};
    Tensor x({static_cast<std::uint32_t>(vals.size())});
    x.data.assign(vals.begin(), vals.end());
    SharedTensor sx = share(r.s, x);
    SharedTensor bit;
    Tensor y = reconstruct(r.s, relu(r.s, sx, &bit));
    auto bits = reconstruct_ring(bit);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        CHECK(y.data[i] == doctest::Approx(std::max(0.0, vals[i])).epsilon(1e-12));
        CHECK(bits[i] == (vals[i] > 0 ? 1u : 0u));
    }
}

TEST_CASE("semi-sigmoid clamps to [0,1] and reports both threshold bits") {
    Rig r(22);
    std::vector<double> vals = {-2.0, -0.00001, 0.0, 0.00001, 0.25, 0.99999, 1.0, 1.00001, 3.5};
    Tensor x({static_cast<std::uint32_t>(vals.size())});
    x.data.assign(vals.begin(), vals.end());
    SharedTensor sx = share(r.s, x);
    SharedTensor b0, b1;
    Tensor y = reconstruct(r.s, semi_sigmoid(r.s, sx, &b0, &b1));
    auto gt0 = reconstruct_ring(b0);
    auto ge1 = reconstruct_ring(b1);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        double expect = std::min(1.0, std::max(0.0, vals[i]));
        CHECK(y.data[i] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(gt0[i] == (vals[i] > 0 ? 1u : 0u));
        CHECK(ge1[i] == (vals[i] >= 1 ? 1u : 0u));
    }
}

TEST_CASE("masked openings look uniform") {
    Rig r(23);
    // constant secret; everything the transcript opens during truncation and
    // msb is the secret plus a fresh dealer mask
    std::vector<u64> samples;
    std::vector<RingElement> ring(1000, ring_from_signed(31415926));
    for (int rep = 0; rep < 50; ++rep) {
        SharedTensor t = share_ring(r.s, ring, {1000}, 2);
        SharedTensor masked({1000}, 2, 0);
        TruncationPair p = r.dealer.gen_trunc_pair(1000);
        for (int q = 0; q < 2; ++q)
            for (std::size_t i = 0; i < 1000; ++i)
                masked.shares[q][i] = t.shares[q][i] + p.r.shares[q][i];
        auto m = open(r.s, masked);
        samples.insert(samples.end(), m.begin(), m.end());
    }
    CHECK(testutil::chi_square_top8(samples) < testutil::kChi2Crit255);
}

TEST_CASE("transcripts are deterministic given the seeds") {
    auto run = [](u64 seed) {
        Rig r(seed);
        Tensor x = randt({16}, 40), y = randt({16}, 41);
        SharedTensor sx = share(r.s, x), sy = share(r.s, y);
        SharedTensor z = mul_fixed(r.s, sx, sy);
        relu(r.s, z.scale_exponent == 1 ? z : z, nullptr);
        return std::pair(r.net.transcript_hash(), reconstruct(r.s, z).data);
    };
    auto [h1, v1] = run(7);
    auto [h2, v2] = run(7);
    auto [h3, v3] = run(8);
    CHECK(h1 == h2);
    CHECK(v1 == v2);
    CHECK(h1 != h3);  // different masks, different transcript
    for (std::size_t i = 0; i < v1.size(); ++i)
        CHECK(v1[i] == doctest::Approx(v3[i]).epsilon(1e-9));  // same logical result
}

TEST_CASE("three-party sessions work end to end") {
    Rig r(24, 3);
    Tensor x = randt({32}, 50), y = randt({32}, 51);
    for (auto& v : x.data) v = r.codec.decode(r.codec.encode(v));
    for (auto& v : y.data) v = r.codec.decode(r.codec.encode(v));
    SharedTensor sx = share(r.s, x), sy = share(r.s, y);
    Tensor z = reconstruct(r.s, mul_fixed(r.s, sx, sy));
    for (std::size_t i = 0; i < 32; ++i)
        CHECK(std::fabs(z.data[i] - x.data[i] * y.data[i]) < 1.0 / 1e5 + 1e-9);
    SharedTensor b;
    Tensor rl = reconstruct(r.s, relu(r.s, sx, &b));
    for (std::size_t i = 0; i < 32; ++i) CHECK(rl.data[i] == doctest::Approx(std::max(0.0, x.data[i])));
}

TEST_CASE("base-2 codec sessions truncate exactly too") {
    FixedPointCodec c2(2, 13);
    Rig r(25, 2, c2);
    Tensor x = randt({64}, 60, -4.0, 4.0), y = randt({64}, 61, -4.0, 4.0);
    for (auto& v : x.data) v = c2.decode(c2.encode(v));
    for (auto& v : y.data) v = c2.decode(c2.encode(v));
    SharedTensor sx = share(r.s, x), sy = share(r.s, y);
    Tensor z = reconstruct(r.s, mul_fixed(r.s, sx, sy));
    for (std::size_t i = 0; i < 64; ++i)
        CHECK(std::fabs(z.data[i] - x.data[i] * y.data[i]) < 1.0 / static_cast<double>(c2.scale) + 1e-9);
}

TEST_CASE("traffic accounting attributes bytes to the active phase label") {
    Rig r(26);
    r.net.set_phase_label("warmup");
    Tensor x = randt({8}, 70), y = randt({8}, 71);
    SharedTensor sx = share(r.s, x), sy = share(r.s, y);
    mul_secure(r.s, sx, sy);
    u64 warm = r.net.stats(0).phases.at("warmup").bytes_out;
    CHECK(warm > 0);
    r.net.set_phase_label("main");
    mul_secure(r.s, sx, sy);
    CHECK(r.net.stats(0).phases.at("warmup").bytes_out == warm);
    CHECK(r.net.stats(0).phases.at("main").bytes_out == warm);
    CHECK(r.net.stats(0).phases.at("main").rounds == 1);
}
