#pragma once

#include <cstdint>
#include <vector>

#include "scol/errors.hpp"
#include "scol/ring.hpp"

namespace scol {

// Additive n-of-n sharing of a tensor. The modular sum of all parties' share
// vectors encodes the logical tensor at base^(f * scale_exponent).
// scale_exponent 0 is used internally for raw ring values (bits, masks).
struct SharedTensor {
    std::vector<std::uint32_t> shape;
    int scale_exponent = 1;
    std::vector<std::vector<RingElement>> shares;  // [party][element], row-major

    SharedTensor() = default;
    SharedTensor(std::vector<std::uint32_t> shape_, int parties, int scale_exponent_ = 1)
        : shape(std::move(shape_)), scale_exponent(scale_exponent_) {
        shares.assign(static_cast<std::size_t>(parties), std::vector<RingElement>(count(shape), 0));
    }

    static std::size_t count(const std::vector<std::uint32_t>& s) {
        std::size_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }

    std::size_t size() const { return shares.empty() ? 0 : shares[0].size(); }
    int party_count() const { return static_cast<int>(shares.size()); }
    std::uint32_t rows() const { return shape.empty() ? 1 : shape[0]; }
    std::uint32_t cols() const {
        return shape.size() < 2 ? static_cast<std::uint32_t>(size() / rows()) : shape[1];
    }
};

inline bool same_shape(const SharedTensor& a, const SharedTensor& b) {
    return a.shape == b.shape;
}

// Share-vector block: scale_exponent(1), rank(1), rank x dim(4 LE), elements(8 LE).
std::vector<std::uint8_t> serialize_share_block(const SharedTensor& t, int party);
// Parses one block; returns a single-party SharedTensor holding the vector.
SharedTensor parse_share_block(const std::uint8_t* data, std::size_t len, std::size_t* consumed = nullptr);

}  // namespace scol
