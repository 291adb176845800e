#include "scol/shared_tensor.hpp"

namespace scol {

std::vector<std::uint8_t> serialize_share_block(const SharedTensor& t, int party) {
    const auto& vec = t.shares.at(static_cast<std::size_t>(party));
    std::vector<std::uint8_t> out;
    out.reserve(2 + 4 * t.shape.size() + 8 * vec.size());
    out.push_back(static_cast<std::uint8_t>(t.scale_exponent));
    out.push_back(static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) put_le32(out, d);
    for (auto v : vec) put_le64(out, v);
    return out;
}

SharedTensor parse_share_block(const std::uint8_t* data, std::size_t len, std::size_t* consumed) {
    if (len < 2) throw FormatError("share block too short");
    int scale_exponent = data[0];
    int rank = data[1];
    std::size_t off = 2;
    std::vector<std::uint32_t> shape;
    for (int i = 0; i < rank; ++i) {
        if (off + 4 > len) throw FormatError("share block truncated in shape");
        shape.push_back(get_le32(data + off));
        off += 4;
    }
    SharedTensor t(shape, 1, scale_exponent);
    std::size_t n = t.size();
    if (off + 8 * n > len) throw FormatError("share block truncated in payload");
    for (std::size_t i = 0; i < n; ++i) {
        t.shares[0][i] = get_le64(data + off);
        off += 8;
    }
    if (consumed) *consumed = off;
    return t;
}

}  // namespace scol
