#include "scol/correlated.hpp"

#include <sstream>

namespace scol {

std::string RandKey::str() const {
    std::ostringstream os;
    switch (kind) {
        case RandKind::BeaverElem: os << "beaver"; break;
        case RandKind::BeaverMatmul: os << "matmul"; break;
        case RandKind::TruncPair: os << "trunc"; break;
        case RandKind::CmpTuple: os << "cmp"; break;
    }
    for (auto d : dims) os << ":" << d;
    return os.str();
}

std::string RandomnessBudget::str() const {
    std::ostringstream os;
    for (const auto& [k, v] : planned) os << k.str() << " x" << v << "\n";
    return os.str();
}

static BeaverTriple zero_beaver(int parties, std::size_t n) {
    BeaverTriple t;
    std::vector<std::uint32_t> shape{static_cast<std::uint32_t>(n)};
    t.a = SharedTensor(shape, parties, 0);
    t.b = SharedTensor(shape, parties, 0);
    t.c = SharedTensor(shape, parties, 0);
    return t;
}

BeaverTriple CountingPool::take_beaver(std::size_t n) {
    record(beaver_key(n));
    return zero_beaver(parties_, n);
}

BeaverTriple CountingPool::take_matmul(std::uint32_t m, std::uint32_t k, std::uint32_t n) {
    record(matmul_key(m, k, n));
    BeaverTriple t;
    t.matmul = true;
    t.a = SharedTensor({m, k}, parties_, 0);
    t.b = SharedTensor({k, n}, parties_, 0);
    t.c = SharedTensor({m, n}, parties_, 0);
    return t;
}

TruncationPair CountingPool::take_trunc(std::size_t n) {
    record(trunc_key(n));
    TruncationPair p;
    auto n32 = static_cast<std::uint32_t>(n);
    p.r = SharedTensor({n32}, parties_, 0);
    p.r_hi = SharedTensor({n32}, parties_, 0);
    p.r_bits = SharedTensor({n32, 64}, parties_, 0);
    p.r_lo_bits = SharedTensor({n32, static_cast<std::uint32_t>(frac_bit_width(scale_))}, parties_, 0);
    p.aux.reserve(trunc_aux_triples(scale_));
    for (std::size_t i = 0; i < trunc_aux_triples(scale_); ++i) p.aux.push_back(zero_beaver(parties_, n));
    return p;
}

ComparisonTuple CountingPool::take_cmp(std::size_t n) {
    record(cmp_key(n));
    ComparisonTuple t;
    auto n32 = static_cast<std::uint32_t>(n);
    t.r = SharedTensor({n32}, parties_, 0);
    t.r_bits = SharedTensor({n32, 64}, parties_, 0);
    t.r_msb = SharedTensor({n32}, parties_, 0);
    t.aux.reserve(cmp_aux_triples());
    for (std::size_t i = 0; i < cmp_aux_triples(); ++i) t.aux.push_back(zero_beaver(parties_, n));
    return t;
}

}  // namespace scol
