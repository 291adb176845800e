#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scol/ring.hpp"
#include "scol/shared_tensor.hpp"

namespace scol {

enum class RandKind : std::uint8_t {
    BeaverElem = 1,
    BeaverMatmul = 2,
    TruncPair = 3,
    CmpTuple = 4,
};

// Pre-shared (a, b, c = a*b): elementwise, or matrix-product form where
// a is m x k, b is k x n, c is m x n. Single use.
struct BeaverTriple {
    SharedTensor a, b, c;
    bool matmul = false;
    bool consumed = false;
};

// Dealer pair for exact fixed-point rescale: r uniform over the ring,
// r_hi = floor(r / scale), full bit decomposition of r, bit decomposition of
// r_lo = r mod scale, plus the raw triples the wrap/correction circuit burns.
struct TruncationPair {
    SharedTensor r;        // shape (n), raw
    SharedTensor r_hi;     // shape (n), raw
    SharedTensor r_bits;   // shape (n, 64), raw bits, LSB first
    SharedTensor r_lo_bits;  // shape (n, nbits(scale)), raw bits
    std::vector<BeaverTriple> aux;
    bool consumed = false;
};

// Mask for secure comparison: uniform r, its bit decomposition, and its MSB.
struct ComparisonTuple {
    SharedTensor r;       // shape (n), raw
    SharedTensor r_bits;  // shape (n, 64), raw bits, LSB first
    SharedTensor r_msb;   // shape (n), raw
    std::vector<BeaverTriple> aux;
    bool consumed = false;
};

// Raw-triple demand of the comparison circuits, fixed by the ring width and
// the codec's scale. A less-than scan over B bits costs 2*(B-1) multiplies.
inline std::size_t lt_scan_triples(std::size_t bits) { return bits < 2 ? 0 : 2 * (bits - 1); }
inline std::size_t cmp_aux_triples() { return lt_scan_triples(63) + 1; }
inline int frac_bit_width(u64 scale) {
    int b = 0;
    for (u64 v = scale - 1; v != 0; v >>= 1) ++b;
    return b;
}
inline std::size_t trunc_aux_triples(u64 scale) {
    return lt_scan_triples(64) + 2 * lt_scan_triples(static_cast<std::size_t>(frac_bit_width(scale))) + 2;
}

// Budget key: kind plus shape ((n) elementwise, (m,k,n) for matmul triples).
struct RandKey {
    RandKind kind;
    std::vector<std::uint32_t> dims;
    bool operator<(const RandKey& o) const {
        if (kind != o.kind) return kind < o.kind;
        return dims < o.dims;
    }
    bool operator==(const RandKey& o) const { return kind == o.kind && dims == o.dims; }
    std::string str() const;
};

// Counts of correlated randomness per kind/shape, planned vs consumed.
struct RandomnessBudget {
    std::map<RandKey, u64> planned;

    void add(const RandKey& k, u64 n = 1) { planned[k] += n; }
    u64 total() const {
        u64 t = 0;
        for (auto& [k, v] : planned) t += v;
        return t;
    }
    RandomnessBudget scaled(u64 factor) const {
        RandomnessBudget out;
        for (auto& [k, v] : planned) out.planned[k] = v * factor;
        return out;
    }
    void merge(const RandomnessBudget& o) {
        for (auto& [k, v] : o.planned) planned[k] += v;
    }
    bool operator==(const RandomnessBudget& o) const { return planned == o.planned; }
    u64 count(RandKind kind) const {
        u64 t = 0;
        for (auto& [k, v] : planned)
            if (k.kind == kind) t += v;
        return t;
    }
    std::string str() const;
};

// Source of correlated randomness for one protocol session.
class RandomnessPool {
  public:
    virtual ~RandomnessPool() = default;
    virtual BeaverTriple take_beaver(std::size_t n) = 0;
    virtual BeaverTriple take_matmul(std::uint32_t m, std::uint32_t k, std::uint32_t n) = 0;
    virtual TruncationPair take_trunc(std::size_t n) = 0;
    virtual ComparisonTuple take_cmp(std::size_t n) = 0;

    const RandomnessBudget& consumed() const { return consumed_; }

  protected:
    void record(const RandKey& k) { consumed_.add(k); }
    RandomnessBudget consumed_;
};

inline RandKey beaver_key(std::size_t n) {
    return RandKey{RandKind::BeaverElem, {static_cast<std::uint32_t>(n)}};
}
inline RandKey matmul_key(std::uint32_t m, std::uint32_t k, std::uint32_t n) {
    return RandKey{RandKind::BeaverMatmul, {m, k, n}};
}
inline RandKey trunc_key(std::size_t n) {
    return RandKey{RandKind::TruncPair, {static_cast<std::uint32_t>(n)}};
}
inline RandKey cmp_key(std::size_t n) {
    return RandKey{RandKind::CmpTuple, {static_cast<std::uint32_t>(n)}};
}

// Serves zero-valued (still internally consistent) randomness and tallies
// demand; used to derive budgets by dry-running a secure phase.
class CountingPool : public RandomnessPool {
  public:
    CountingPool(int parties, u64 scale) : parties_(parties), scale_(scale) {}
    BeaverTriple take_beaver(std::size_t n) override;
    BeaverTriple take_matmul(std::uint32_t m, std::uint32_t k, std::uint32_t n) override;
    TruncationPair take_trunc(std::size_t n) override;
    ComparisonTuple take_cmp(std::size_t n) override;

  private:
    int parties_;
    u64 scale_;
};

}  // namespace scol
