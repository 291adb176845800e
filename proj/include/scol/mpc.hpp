#pragma once

#include <random>
#include <vector>

#include "scol/correlated.hpp"
#include "scol/ring.hpp"
#include "scol/shared_tensor.hpp"
#include "scol/tensor.hpp"
#include "scol/transport.hpp"

namespace scol {

// One two-(or p-)party protocol session: codec, transport, correlated
// randomness, and the sharing RNG. Single-threaded; parties advance in
// lockstep at open barriers.
struct SecureSession {
    int parties = 2;
    FixedPointCodec codec;
    RandomnessPool* pool = nullptr;
    InProcNet* net = nullptr;
    std::mt19937_64 rng;

    SecureSession(int parties_, FixedPointCodec codec_, RandomnessPool* pool_, InProcNet* net_,
                  u64 share_seed)
        : parties(parties_), codec(codec_), pool(pool_), net(net_), rng(share_seed) {}
};

// --- sharing / reconstruction ---

// Additive sharing: parties 0..p-2 hold uniform ring elements, the last party
// holds the encoding minus their sum.
SharedTensor share(SecureSession& s, const Tensor& secret);
SharedTensor share_ring(SecureSession& s, const std::vector<RingElement>& values,
                        std::vector<std::uint32_t> shape, int scale_exponent);
std::vector<RingElement> reconstruct_ring(const SharedTensor& t);
Tensor reconstruct(const SecureSession& s, const SharedTensor& t);

// --- communication ---

// One synchronous all-to-all opening round covering every listed tensor.
std::vector<std::vector<RingElement>> open_blocks(SecureSession& s,
                                                  const std::vector<const SharedTensor*>& ts);
std::vector<RingElement> open(SecureSession& s, const SharedTensor& t);

// --- local (zero-communication) linear ops ---

SharedTensor add_shared(const SharedTensor& x, const SharedTensor& y);
SharedTensor sub_shared(const SharedTensor& x, const SharedTensor& y);
// Public constant applied by party 0 only.
SharedTensor add_public(const SecureSession& s, const SharedTensor& x, const Tensor& c);
SharedTensor add_public_scalar_ring(const SharedTensor& x, RingElement c);
SharedTensor mul_public_int(const SharedTensor& x, i64 c);
// Multiplies by encode(c); raises scale_exponent by one.
SharedTensor mul_public_real(const SecureSession& s, const SharedTensor& x, double c);
SharedTensor neg_shared(const SharedTensor& x);
SharedTensor transpose_shared(const SharedTensor& x);
SharedTensor concat_shared(const std::vector<const SharedTensor*>& parts, int axis);
// Broadcast-add a shared row vector to every row of a shared matrix.
SharedTensor add_row_broadcast(const SharedTensor& x, const SharedTensor& row);
SharedTensor sum_rows(const SharedTensor& x);

// --- interactive ops ---

// One round opening x-a and y-b; result carries scale_exponent
// x.scale_exponent + y.scale_exponent. The triple is marked consumed.
SharedTensor mul_beaver(SecureSession& s, const SharedTensor& x, const SharedTensor& y,
                        BeaverTriple& triple);
SharedTensor matmul_beaver(SecureSession& s, const SharedTensor& x, const SharedTensor& y,
                           BeaverTriple& triple);

// Exact dealer-assisted rescale from scale_exponent 2 to 1 (floor toward
// minus infinity on the signed value; error <= 1 ulp vs the real quotient).
SharedTensor truncate(SecureSession& s, const SharedTensor& t, TruncationPair& pair);

// Shared bit per element: 1 where the signed value is negative, else 0.
SharedTensor msb(SecureSession& s, const SharedTensor& t, ComparisonTuple& tuple);

// max(0, x), exact on fixed-point values. Consumes one comparison tuple and
// one Beaver triple per call; if positive_bit is non-null it receives the
// shared indicator [x > 0] for reuse in backward passes.
SharedTensor relu(SecureSession& s, const SharedTensor& t, SharedTensor* positive_bit = nullptr);
// relu(x) - relu(x-1) = clamp(x, 0, 1).
SharedTensor semi_sigmoid(SecureSession& s, const SharedTensor& t,
                          SharedTensor* bit_gt0 = nullptr, SharedTensor* bit_gt1 = nullptr);

// Convenience wrappers pulling randomness from the session pool.
SharedTensor mul_secure(SecureSession& s, const SharedTensor& x, const SharedTensor& y);
SharedTensor matmul_secure(SecureSession& s, const SharedTensor& x, const SharedTensor& y);
SharedTensor truncate_secure(SecureSession& s, const SharedTensor& t);
// Multiply-then-rescale for scale_exponent-1 inputs.
SharedTensor mul_fixed(SecureSession& s, const SharedTensor& x, const SharedTensor& y);
SharedTensor matmul_fixed(SecureSession& s, const SharedTensor& x, const SharedTensor& y);

}  // namespace scol
