#include "scol/mpc.hpp"

#include <cassert>

namespace scol {

namespace {

std::vector<RingElement>& sv(SharedTensor& t, int p) { return t.shares[static_cast<std::size_t>(p)]; }
const std::vector<RingElement>& sv(const SharedTensor& t, int p) {
    return t.shares[static_cast<std::size_t>(p)];
}

SharedTensor like(const SharedTensor& t, int scale_exponent) {
    return SharedTensor(t.shape, t.party_count(), scale_exponent);
}

void require_same_shape(const SharedTensor& a, const SharedTensor& b, const char* op) {
    if (!same_shape(a, b)) throw ShapeError(std::string(op) + ": shape mismatch");
}

// z += pub[i] * share[i] elementwise, per party.
void add_scaled_elem(SharedTensor& z, const std::vector<RingElement>& pub, const SharedTensor& x) {
    for (int p = 0; p < z.party_count(); ++p)
        for (std::size_t i = 0; i < z.size(); ++i) sv(z, p)[i] += pub[i] * sv(x, p)[i];
}

// Extracts bit column `bit` of a (n, B) bit tensor as a (n) tensor.
SharedTensor bit_column(const SharedTensor& bits, int bit) {
    std::size_t n = bits.shape[0], width = bits.shape[1];
    SharedTensor out({static_cast<std::uint32_t>(n)}, bits.party_count(), 0);
    for (int p = 0; p < bits.party_count(); ++p)
        for (std::size_t i = 0; i < n; ++i)
            sv(out, p)[i] = sv(bits, p)[i * width + static_cast<std::size_t>(bit)];
    return out;
}

void mod_matmul(const std::vector<RingElement>& a, const std::vector<RingElement>& b,
                std::vector<RingElement>& c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            RingElement av = a[i * k + p];
            for (std::size_t j = 0; j < n; ++j) c[i * n + j] += av * b[p * n + j];
        }
}

// Elementwise Beaver multiplication without scale-exponent policy; the
// public mul_beaver wraps this with the contract checks.
SharedTensor mul_core(SecureSession& s, const SharedTensor& x, const SharedTensor& y,
                      BeaverTriple& triple, int out_exp) {
    if (triple.consumed) throw ProtocolError("Beaver triple reuse");
    if (triple.matmul || triple.a.size() != x.size()) throw ShapeError("triple does not match operands");
    require_same_shape(x, y, "mul_beaver");
    triple.consumed = true;

    SharedTensor xd = like(x, 0), ye = like(x, 0);
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < x.size(); ++i) {
            sv(xd, p)[i] = sv(x, p)[i] - sv(triple.a, p)[i];
            sv(ye, p)[i] = sv(y, p)[i] - sv(triple.b, p)[i];
        }
    auto opened = open_blocks(s, {&xd, &ye});
    const auto& d = opened[0];
    const auto& e = opened[1];

    SharedTensor z = like(x, out_exp);
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < x.size(); ++i)
            sv(z, p)[i] = sv(triple.c, p)[i] + d[i] * sv(triple.b, p)[i] + e[i] * sv(triple.a, p)[i];
    for (std::size_t i = 0; i < x.size(); ++i) sv(z, 0)[i] += d[i] * e[i];
    return z;
}

// Two raw multiplications sharing one open barrier: z1 = x*y1, z2 = x*y2.
std::pair<SharedTensor, SharedTensor> mul_two(SecureSession& s, const SharedTensor& x,
                                              const SharedTensor& y1, const SharedTensor& y2,
                                              BeaverTriple& t1, BeaverTriple& t2) {
    if (t1.consumed || t2.consumed) throw ProtocolError("Beaver triple reuse");
    t1.consumed = t2.consumed = true;
    const std::size_t n = x.size();
    SharedTensor d1 = like(x, 0), e1 = like(x, 0), d2 = like(x, 0), e2 = like(x, 0);
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < n; ++i) {
            sv(d1, p)[i] = sv(x, p)[i] - sv(t1.a, p)[i];
            sv(e1, p)[i] = sv(y1, p)[i] - sv(t1.b, p)[i];
            sv(d2, p)[i] = sv(x, p)[i] - sv(t2.a, p)[i];
            sv(e2, p)[i] = sv(y2, p)[i] - sv(t2.b, p)[i];
        }
    auto od = open_blocks(s, {&d1, &e1, &d2, &e2});
    SharedTensor z1 = like(x, 0), z2 = like(x, 0);
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < n; ++i) {
            sv(z1, p)[i] = sv(t1.c, p)[i] + od[0][i] * sv(t1.b, p)[i] + od[1][i] * sv(t1.a, p)[i];
            sv(z2, p)[i] = sv(t2.c, p)[i] + od[2][i] * sv(t2.b, p)[i] + od[3][i] * sv(t2.a, p)[i];
        }
    for (std::size_t i = 0; i < n; ++i) {
        sv(z1, 0)[i] += od[0][i] * od[1][i];
        sv(z2, 0)[i] += od[2][i] * od[3][i];
    }
    return {std::move(z1), std::move(z2)};
}

struct AuxCursor {
    std::vector<BeaverTriple>* aux;
    std::size_t next = 0;
    BeaverTriple& take() {
        if (next >= aux->size()) throw ProtocolError("comparison circuit exhausted its aux triples");
        return (*aux)[next++];
    }
};

// Shares of the indicator [r > c] for public per-element values c, where r is
// given by bit columns bits[lo_bit..hi_bit] (hi_bit is the most significant).
// Scan from the top: w accumulates (prefix-equal AND r_i > c_i), e tracks the
// prefix-equal indicator.
SharedTensor lt_public(SecureSession& s, const std::vector<RingElement>& c,
                       const SharedTensor& bits, int lo_bit, int hi_bit, AuxCursor& aux) {
    std::size_t n = bits.shape[0];
    int parties = bits.party_count();
    SharedTensor w({static_cast<std::uint32_t>(n)}, parties, 0);
    SharedTensor e({static_cast<std::uint32_t>(n)}, parties, 0);
    for (int bit = hi_bit; bit >= lo_bit; --bit) {
        SharedTensor r_i = bit_column(bits, bit);
        // gt = r_i * (1 - c_i); eq = (1 - c_i) + (2 c_i - 1) r_i. Both local.
        SharedTensor gt({static_cast<std::uint32_t>(n)}, parties, 0);
        SharedTensor eq({static_cast<std::uint32_t>(n)}, parties, 0);
        for (std::size_t i = 0; i < n; ++i) {
            RingElement ci = (c[i] >> bit) & 1;
            for (int p = 0; p < parties; ++p) {
                sv(gt, p)[i] = sv(r_i, p)[i] * (1 - ci);
                sv(eq, p)[i] = sv(r_i, p)[i] * (2 * ci - 1);
            }
            sv(eq, 0)[i] += 1 - ci;
        }
        if (bit == hi_bit) {
            w = std::move(gt);
            e = std::move(eq);
        } else {
            BeaverTriple& t1 = aux.take();
            BeaverTriple& t2 = aux.take();
            auto [term, e_next] = mul_two(s, e, gt, eq, t1, t2);
            for (int p = 0; p < parties; ++p)
                for (std::size_t i = 0; i < n; ++i) sv(w, p)[i] += sv(term, p)[i];
            e = std::move(e_next);
        }
    }
    return w;
}

}  // namespace

SharedTensor share_ring(SecureSession& s, const std::vector<RingElement>& values,
                        std::vector<std::uint32_t> shape, int scale_exponent) {
    SharedTensor t(std::move(shape), s.parties, scale_exponent);
    if (t.size() != values.size()) throw ShapeError("share: value/shape mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        RingElement acc = 0;
        for (int p = 0; p + 1 < s.parties; ++p) {
            RingElement r = s.rng();
            sv(t, p)[i] = r;
            acc += r;
        }
        sv(t, s.parties - 1)[i] = values[i] - acc;
    }
    return t;
}

SharedTensor share(SecureSession& s, const Tensor& secret) {
    std::vector<RingElement> enc(secret.size());
    for (std::size_t i = 0; i < secret.size(); ++i) enc[i] = s.codec.encode(secret.data[i]);
    return share_ring(s, enc, secret.shape, 1);
}

std::vector<RingElement> reconstruct_ring(const SharedTensor& t) {
    std::vector<RingElement> out(t.size(), 0);
    for (int p = 0; p < t.party_count(); ++p)
        for (std::size_t i = 0; i < t.size(); ++i) out[i] += sv(t, p)[i];
    return out;
}

Tensor reconstruct(const SecureSession& s, const SharedTensor& t) {
    auto ring = reconstruct_ring(t);
    Tensor out(t.shape);
    for (std::size_t i = 0; i < ring.size(); ++i) out.data[i] = s.codec.decode(ring[i], t.scale_exponent);
    return out;
}

std::vector<std::vector<RingElement>> open_blocks(SecureSession& s,
                                                  const std::vector<const SharedTensor*>& ts) {
    if (s.net) {
        s.net->count_round();
        for (const SharedTensor* t : ts) {
            for (int i = 0; i < s.parties; ++i) {
                auto block = serialize_share_block(*t, i);
                for (int j = 0; j < s.parties; ++j) {
                    if (i == j) continue;
                    Message m;
                    m.msg_type = 1;
                    m.sender = i;
                    m.receiver = j;
                    m.phase = PhaseTag::OPEN;
                    m.payload = block;
                    s.net->send(std::move(m));
                }
            }
            // Drain so channels stay empty between barriers.
            for (int j = 0; j < s.parties; ++j)
                for (int i = 0; i < s.parties; ++i)
                    if (i != j) s.net->recv(j, i);
        }
    }
    std::vector<std::vector<RingElement>> out;
    out.reserve(ts.size());
    for (const SharedTensor* t : ts) out.push_back(reconstruct_ring(*t));
    return out;
}

std::vector<RingElement> open(SecureSession& s, const SharedTensor& t) {
    return open_blocks(s, {&t})[0];
}

SharedTensor add_shared(const SharedTensor& x, const SharedTensor& y) {
    require_same_shape(x, y, "add_shared");
    if (x.scale_exponent != y.scale_exponent) throw ProtocolError("add_shared: scale mismatch");
    SharedTensor z = like(x, x.scale_exponent);
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < x.size(); ++i) sv(z, p)[i] = sv(x, p)[i] + sv(y, p)[i];
    return z;
}

SharedTensor sub_shared(const SharedTensor& x, const SharedTensor& y) {
    require_same_shape(x, y, "sub_shared");
    if (x.scale_exponent != y.scale_exponent) throw ProtocolError("sub_shared: scale mismatch");
    SharedTensor z = like(x, x.scale_exponent);
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < x.size(); ++i) sv(z, p)[i] = sv(x, p)[i] - sv(y, p)[i];
    return z;
}

SharedTensor add_public(const SecureSession& s, const SharedTensor& x, const Tensor& c) {
    if (x.shape != c.shape) throw ShapeError("add_public: shape mismatch");
    SharedTensor z = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        RingElement enc = s.codec.encode(c.data[i]);
        for (int e = 1; e < x.scale_exponent; ++e) enc *= s.codec.scale;
        sv(z, 0)[i] += enc;
    }
    return z;
}

SharedTensor add_public_scalar_ring(const SharedTensor& x, RingElement c) {
    SharedTensor z = x;
    for (std::size_t i = 0; i < x.size(); ++i) sv(z, 0)[i] += c;
    return z;
}

SharedTensor mul_public_int(const SharedTensor& x, i64 c) {
    SharedTensor z = like(x, x.scale_exponent);
    RingElement rc = ring_from_signed(c);
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < x.size(); ++i) sv(z, p)[i] = sv(x, p)[i] * rc;
    return z;
}

SharedTensor mul_public_real(const SecureSession& s, const SharedTensor& x, double c) {
    SharedTensor z = like(x, x.scale_exponent + 1);
    RingElement rc = s.codec.encode(c);
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < x.size(); ++i) sv(z, p)[i] = sv(x, p)[i] * rc;
    return z;
}

SharedTensor neg_shared(const SharedTensor& x) { return mul_public_int(x, -1); }

SharedTensor transpose_shared(const SharedTensor& x) {
    std::size_t m = x.rows(), n = x.cols();
    SharedTensor z({static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(m)}, x.party_count(),
                   x.scale_exponent);
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) sv(z, p)[j * m + i] = sv(x, p)[i * n + j];
    return z;
}

SharedTensor concat_shared(const std::vector<const SharedTensor*>& parts, int axis) {
    if (parts.empty()) throw ShapeError("concat of nothing");
    const SharedTensor& first = *parts[0];
    for (const auto* p : parts) {
        if (p->scale_exponent != first.scale_exponent)
            throw ProtocolError("concat_shared: scale mismatch");
        if (p->shape.size() != first.shape.size()) throw ShapeError("concat_shared: rank mismatch");
    }
    if (parts.size() == 1) return first;
    if (axis == 0) {
        std::uint32_t rows = 0, cols = first.cols();
        for (const auto* p : parts) {
            if (p->cols() != cols) throw ShapeError("concat_shared: column mismatch");
            rows += p->rows();
        }
        std::vector<std::uint32_t> shape = first.shape;
        shape[0] = rows;
        SharedTensor z(shape, first.party_count(), first.scale_exponent);
        for (int p = 0; p < first.party_count(); ++p) {
            std::size_t off = 0;
            for (const auto* part : parts) {
                const auto& v = sv(*part, p);
                std::copy(v.begin(), v.end(), sv(z, p).begin() + static_cast<std::ptrdiff_t>(off));
                off += v.size();
            }
        }
        return z;
    }
    if (axis != 1) throw ShapeError("concat_shared: unsupported axis");
    std::uint32_t rows = first.rows(), cols = 0;
    for (const auto* p : parts) {
        if (p->rows() != rows) throw ShapeError("concat_shared: row mismatch");
        cols += p->cols();
    }
    SharedTensor z({rows, cols}, first.party_count(), first.scale_exponent);
    for (int p = 0; p < first.party_count(); ++p)
        for (std::size_t i = 0; i < rows; ++i) {
            std::size_t off = 0;
            for (const auto* part : parts) {
                std::size_t w = part->cols();
                for (std::size_t j = 0; j < w; ++j)
                    sv(z, p)[i * cols + off + j] = sv(*part, p)[i * w + j];
                off += w;
            }
        }
    return z;
}

SharedTensor add_row_broadcast(const SharedTensor& x, const SharedTensor& row) {
    if (row.size() != x.cols()) throw ShapeError("add_row_broadcast: width mismatch");
    if (x.scale_exponent != row.scale_exponent) throw ProtocolError("add_row_broadcast: scale mismatch");
    SharedTensor z = x;
    std::size_t n = x.cols();
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < n; ++j) sv(z, p)[i * n + j] += sv(row, p)[j];
    return z;
}

SharedTensor sum_rows(const SharedTensor& x) {
    std::size_t m = x.rows(), n = x.cols();
    SharedTensor z({static_cast<std::uint32_t>(n)}, x.party_count(), x.scale_exponent);
    for (int p = 0; p < x.party_count(); ++p)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) sv(z, p)[j] += sv(x, p)[i * n + j];
    return z;
}

SharedTensor mul_beaver(SecureSession& s, const SharedTensor& x, const SharedTensor& y,
                        BeaverTriple& triple) {
    int out_exp = x.scale_exponent + y.scale_exponent;
    if (out_exp > 2) throw ProtocolError("mul_beaver: scale exponent would exceed 2");
    return mul_core(s, x, y, triple, out_exp);
}

SharedTensor matmul_beaver(SecureSession& s, const SharedTensor& x, const SharedTensor& y,
                           BeaverTriple& triple) {
    if (triple.consumed) throw ProtocolError("Beaver triple reuse");
    if (!triple.matmul) throw ShapeError("matmul_beaver: elementwise triple supplied");
    if (x.cols() != y.rows()) throw ShapeError("matmul_beaver: inner dimension mismatch");
    if (triple.a.shape != x.shape || triple.b.shape != y.shape)
        throw ShapeError("matmul_beaver: triple shape mismatch");
    int out_exp = x.scale_exponent + y.scale_exponent;
    if (out_exp > 2) throw ProtocolError("matmul_beaver: scale exponent would exceed 2");
    triple.consumed = true;

    std::size_t m = x.rows(), k = x.cols(), n = y.cols();
    SharedTensor xd = like(x, 0), ye = like(y, 0);
    for (int p = 0; p < x.party_count(); ++p) {
        for (std::size_t i = 0; i < x.size(); ++i) sv(xd, p)[i] = sv(x, p)[i] - sv(triple.a, p)[i];
        for (std::size_t i = 0; i < y.size(); ++i) sv(ye, p)[i] = sv(y, p)[i] - sv(triple.b, p)[i];
    }
    auto opened = open_blocks(s, {&xd, &ye});
    const auto& d = opened[0];
    const auto& e = opened[1];

    SharedTensor z({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(n)}, x.party_count(),
                   out_exp);
    for (int p = 0; p < x.party_count(); ++p) {
        mod_matmul(d, sv(triple.b, p), sv(z, p), m, k, n);
        mod_matmul(sv(triple.a, p), e, sv(z, p), m, k, n);
        for (std::size_t i = 0; i < z.size(); ++i) sv(z, p)[i] += sv(triple.c, p)[i];
    }
    mod_matmul(d, e, sv(z, 0), m, k, n);
    return z;
}

SharedTensor truncate(SecureSession& s, const SharedTensor& t, TruncationPair& pair) {
    if (t.scale_exponent != 2) throw ProtocolError("truncate: expected scale_exponent 2");
    if (pair.consumed) throw ProtocolError("truncation pair reuse");
    if (pair.r.size() != t.size()) throw ShapeError("truncate: pair size mismatch");
    pair.consumed = true;

    const u64 scale = s.codec.scale;
    const std::size_t n = t.size();
    const int parties = t.party_count();
    // H = floor(2^64 / scale), L = 2^64 mod scale, offset = largest multiple
    // of scale below 2^63 (shifts the signed value into [0, 2^64)).
    u64 h = UINT64_MAX / scale + (UINT64_MAX % scale == scale - 1 ? 1 : 0);
    u64 l = 0 - h * scale;
    u64 offset_q = (1ull << 63) / scale;
    u64 offset = offset_q * scale;

    // Open m = t + offset + r.
    SharedTensor masked({static_cast<std::uint32_t>(n)}, parties, 0);
    for (int p = 0; p < parties; ++p)
        for (std::size_t i = 0; i < n; ++i) sv(masked, p)[i] = sv(t, p)[i] + sv(pair.r, p)[i];
    for (std::size_t i = 0; i < n; ++i) sv(masked, 0)[i] += offset;
    auto m = open(s, masked);

    std::vector<RingElement> m_hi(n), m_lo(n);
    for (std::size_t i = 0; i < n; ++i) {
        m_hi[i] = m[i] / scale;
        m_lo[i] = m[i] % scale;
    }

    AuxCursor aux{&pair.aux};
    // Wrap bit of the opening: w = [r > m].
    SharedTensor w = lt_public(s, m, pair.r_bits, 0, 63, aux);

    // Fractional correction. With u = m_lo - r_lo + w*L, the exact quotient
    // needs delta = floor(u / scale) in {-1, 0, 1}:
    //   w = 0: delta = -[r_lo > m_lo]
    //   w = 1: delta = [m_lo + L >= scale] - [r_lo > t2], t2 = m_lo + L (- scale)
    int lo_bits = frac_bit_width(scale);
    SharedTensor a_ind = lt_public(s, m_lo, pair.r_lo_bits, 0, lo_bits - 1, aux);
    std::vector<RingElement> t2(n), pub1(n);
    for (std::size_t i = 0; i < n; ++i) {
        u64 v = m_lo[i] + l;
        pub1[i] = v >= scale ? 1 : 0;
        t2[i] = v >= scale ? v - scale : v;
    }
    SharedTensor x_ind = lt_public(s, t2, pair.r_lo_bits, 0, lo_bits - 1, aux);
    SharedTensor wa = mul_core(s, w, a_ind, aux.take(), 0);
    SharedTensor wx = mul_core(s, w, x_ind, aux.take(), 0);
    if (aux.next != pair.aux.size()) throw ProtocolError("truncate: aux triple count mismatch");

    // result = m_hi - offset/scale - r_hi + w*H - A + w*A + w*pub1 - w*X
    SharedTensor res({static_cast<std::uint32_t>(n)}, parties, 1);
    res.shape = t.shape;
    for (int p = 0; p < parties; ++p)
        for (std::size_t i = 0; i < n; ++i)
            sv(res, p)[i] = sv(w, p)[i] * h - sv(pair.r_hi, p)[i] - sv(a_ind, p)[i] +
                            sv(wa, p)[i] + sv(w, p)[i] * pub1[i] - sv(wx, p)[i];
    for (std::size_t i = 0; i < n; ++i) sv(res, 0)[i] += m_hi[i] - offset_q;
    return res;
}

SharedTensor msb(SecureSession& s, const SharedTensor& t, ComparisonTuple& tuple) {
    if (tuple.consumed) throw ProtocolError("comparison tuple reuse");
    if (tuple.r.size() != t.size()) throw ShapeError("msb: tuple size mismatch");
    tuple.consumed = true;

    const std::size_t n = t.size();
    const int parties = t.party_count();
    SharedTensor masked({static_cast<std::uint32_t>(n)}, parties, 0);
    for (int p = 0; p < parties; ++p)
        for (std::size_t i = 0; i < n; ++i) sv(masked, p)[i] = sv(t, p)[i] + sv(tuple.r, p)[i];
    auto c = open(s, masked);

    AuxCursor aux{&tuple.aux};
    // w' = [r mod 2^63 > c mod 2^63], w = [r > c]; msb = c63 - r63 + 2w - w'.
    SharedTensor wlow = lt_public(s, c, tuple.r_bits, 0, 62, aux);
    SharedTensor gt63({static_cast<std::uint32_t>(n)}, parties, 0);
    SharedTensor eq63({static_cast<std::uint32_t>(n)}, parties, 0);
    for (std::size_t i = 0; i < n; ++i) {
        RingElement c63 = c[i] >> 63;
        for (int p = 0; p < parties; ++p) {
            sv(gt63, p)[i] = sv(tuple.r_msb, p)[i] * (1 - c63);
            sv(eq63, p)[i] = sv(tuple.r_msb, p)[i] * (2 * c63 - 1);
        }
        sv(eq63, 0)[i] += 1 - c63;
    }
    SharedTensor w = mul_core(s, eq63, wlow, aux.take(), 0);
    if (aux.next != tuple.aux.size()) throw ProtocolError("msb: aux triple count mismatch");

    SharedTensor out({static_cast<std::uint32_t>(n)}, parties, 0);
    out.shape = t.shape;
    for (int p = 0; p < parties; ++p)
        for (std::size_t i = 0; i < n; ++i)
            sv(out, p)[i] = 2 * (sv(gt63, p)[i] + sv(w, p)[i]) - sv(tuple.r_msb, p)[i] - sv(wlow, p)[i];
    for (std::size_t i = 0; i < n; ++i) sv(out, 0)[i] += c[i] >> 63;
    return out;
}

namespace {

// strict: indicator [x > 0] (shifts by one ulp before the sign test),
// otherwise [x >= 0]. Both make relu(0) = 0 exactly.
SharedTensor relu_impl(SecureSession& s, const SharedTensor& t, SharedTensor* bit_out, bool strict) {
    if (!s.pool) throw ProtocolError("relu: session has no randomness pool");
    ComparisonTuple tuple = s.pool->take_cmp(t.size());
    BeaverTriple triple = s.pool->take_beaver(t.size());
    SharedTensor probe = strict ? add_public_scalar_ring(t, static_cast<RingElement>(-1)) : t;
    SharedTensor neg = msb(s, probe, tuple);
    SharedTensor pos = neg_shared(neg);
    pos = add_public_scalar_ring(pos, 1);
    pos.scale_exponent = 0;
    SharedTensor out = mul_core(s, pos, t, triple, t.scale_exponent);
    out.shape = t.shape;
    if (bit_out) *bit_out = pos;
    return out;
}

}  // namespace

SharedTensor relu(SecureSession& s, const SharedTensor& t, SharedTensor* positive_bit) {
    return relu_impl(s, t, positive_bit, true);
}

SharedTensor semi_sigmoid(SecureSession& s, const SharedTensor& t, SharedTensor* bit_gt0,
                          SharedTensor* bit_ge1) {
    SharedTensor r1 = relu_impl(s, t, bit_gt0, true);
    RingElement one = s.codec.encode(1.0);
    SharedTensor shifted = add_public_scalar_ring(t, 0 - one);
    SharedTensor r2 = relu_impl(s, shifted, bit_ge1, false);
    return sub_shared(r1, r2);
}

SharedTensor mul_secure(SecureSession& s, const SharedTensor& x, const SharedTensor& y) {
    if (!s.pool) throw ProtocolError("mul_secure: session has no randomness pool");
    BeaverTriple t = s.pool->take_beaver(x.size());
    return mul_beaver(s, x, y, t);
}

SharedTensor matmul_secure(SecureSession& s, const SharedTensor& x, const SharedTensor& y) {
    if (!s.pool) throw ProtocolError("matmul_secure: session has no randomness pool");
    BeaverTriple t = s.pool->take_matmul(x.rows(), x.cols(), y.cols());
    return matmul_beaver(s, x, y, t);
}

// Large tensors are rescaled in flat slices so the per-pair aux randomness
// (192 size-n triples) stays bounded.
constexpr std::size_t kTruncChunk = 4096;

SharedTensor truncate_secure(SecureSession& s, const SharedTensor& t) {
    if (!s.pool) throw ProtocolError("truncate_secure: session has no randomness pool");
    if (t.size() <= kTruncChunk) {
        TruncationPair p = s.pool->take_trunc(t.size());
        return truncate(s, t, p);
    }
    SharedTensor out = like(t, 1);
    for (std::size_t off = 0; off < t.size(); off += kTruncChunk) {
        std::size_t n = std::min(kTruncChunk, t.size() - off);
        SharedTensor slice({static_cast<std::uint32_t>(n)}, t.party_count(), 2);
        for (int p = 0; p < t.party_count(); ++p)
            std::copy(sv(t, p).begin() + static_cast<std::ptrdiff_t>(off),
                      sv(t, p).begin() + static_cast<std::ptrdiff_t>(off + n), sv(slice, p).begin());
        TruncationPair pair = s.pool->take_trunc(n);
        SharedTensor res = truncate(s, slice, pair);
        for (int p = 0; p < t.party_count(); ++p)
            std::copy(sv(res, p).begin(), sv(res, p).end(),
                      sv(out, p).begin() + static_cast<std::ptrdiff_t>(off));
    }
    return out;
}

SharedTensor mul_fixed(SecureSession& s, const SharedTensor& x, const SharedTensor& y) {
    return truncate_secure(s, mul_secure(s, x, y));
}

SharedTensor matmul_fixed(SecureSession& s, const SharedTensor& x, const SharedTensor& y) {
    return truncate_secure(s, matmul_secure(s, x, y));
}

}  // namespace scol
