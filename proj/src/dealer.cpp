#include "scol/dealer.hpp"

#include <fstream>

#include "scol/errors.hpp"

namespace scol {

SharedTensor Dealer::share_raw(const std::vector<RingElement>& values,
                               std::vector<std::uint32_t> shape) {
    SharedTensor t(std::move(shape), parties_, 0);
    if (t.size() != values.size()) throw ShapeError("dealer share size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        RingElement acc = 0;
        for (int p = 0; p + 1 < parties_; ++p) {
            RingElement r = rng_();
            t.shares[static_cast<std::size_t>(p)][i] = r;
            acc += r;
        }
        t.shares[static_cast<std::size_t>(parties_ - 1)][i] = values[i] - acc;
    }
    return t;
}

std::vector<BeaverTriple> Dealer::gen_aux(std::size_t n, std::size_t count) {
    std::vector<BeaverTriple> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(gen_beaver(n));
    return out;
}

BeaverTriple Dealer::gen_beaver(std::size_t n) {
    std::vector<RingElement> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng_();
        b[i] = rng_();
        c[i] = a[i] * b[i];
    }
    BeaverTriple t;
    std::vector<std::uint32_t> shape{static_cast<std::uint32_t>(n)};
    t.a = share_raw(a, shape);
    t.b = share_raw(b, shape);
    t.c = share_raw(c, shape);
    return t;
}

BeaverTriple Dealer::gen_matmul(std::uint32_t m, std::uint32_t k, std::uint32_t n) {
    std::vector<RingElement> a(static_cast<std::size_t>(m) * k), b(static_cast<std::size_t>(k) * n);
    for (auto& v : a) v = rng_();
    for (auto& v : b) v = rng_();
    std::vector<RingElement> c(static_cast<std::size_t>(m) * n, 0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            RingElement av = a[i * k + p];
            for (std::size_t j = 0; j < n; ++j) c[i * n + j] += av * b[p * n + j];
        }
    BeaverTriple t;
    t.matmul = true;
    t.a = share_raw(a, {m, k});
    t.b = share_raw(b, {k, n});
    t.c = share_raw(c, {m, n});
    return t;
}

TruncationPair Dealer::gen_trunc_pair(std::size_t n) {
    const u64 scale = codec_.scale;
    const int nlo = frac_bit_width(scale);
    std::vector<RingElement> r(n), r_hi(n);
    std::vector<RingElement> bits(n * 64), lo_bits(n * static_cast<std::size_t>(nlo));
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = rng_();
        r_hi[i] = r[i] / scale;
        u64 r_lo = r[i] % scale;
        for (int b = 0; b < 64; ++b) bits[i * 64 + static_cast<std::size_t>(b)] = (r[i] >> b) & 1;
        for (int b = 0; b < nlo; ++b)
            lo_bits[i * static_cast<std::size_t>(nlo) + static_cast<std::size_t>(b)] = (r_lo >> b) & 1;
    }
    TruncationPair p;
    auto n32 = static_cast<std::uint32_t>(n);
    p.r = share_raw(r, {n32});
    p.r_hi = share_raw(r_hi, {n32});
    p.r_bits = share_raw(bits, {n32, 64});
    p.r_lo_bits = share_raw(lo_bits, {n32, static_cast<std::uint32_t>(nlo)});
    p.aux = gen_aux(n, trunc_aux_triples(scale));
    return p;
}

ComparisonTuple Dealer::gen_cmp_tuple(std::size_t n) {
    std::vector<RingElement> r(n), msb(n), bits(n * 64);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = rng_();
        msb[i] = r[i] >> 63;
        for (int b = 0; b < 64; ++b) bits[i * 64 + static_cast<std::size_t>(b)] = (r[i] >> b) & 1;
    }
    ComparisonTuple t;
    auto n32 = static_cast<std::uint32_t>(n);
    t.r = share_raw(r, {n32});
    t.r_bits = share_raw(bits, {n32, 64});
    t.r_msb = share_raw(msb, {n32});
    t.aux = gen_aux(n, cmp_aux_triples());
    return t;
}

// --- pools ---

void OnDemandPool::charge(const RandKey& key) {
    if (!enforce_) return;
    auto it = budget_.planned.find(key);
    u64 limit = it == budget_.planned.end() ? 0 : it->second;
    if (consumed_.planned[key] + 1 > limit)
        throw ProtocolError("randomness budget exhausted for " + key.str());
}

BeaverTriple OnDemandPool::take_beaver(std::size_t n) {
    charge(beaver_key(n));
    record(beaver_key(n));
    return dealer_.gen_beaver(n);
}
BeaverTriple OnDemandPool::take_matmul(std::uint32_t m, std::uint32_t k, std::uint32_t n) {
    charge(matmul_key(m, k, n));
    record(matmul_key(m, k, n));
    return dealer_.gen_matmul(m, k, n);
}
TruncationPair OnDemandPool::take_trunc(std::size_t n) {
    charge(trunc_key(n));
    record(trunc_key(n));
    return dealer_.gen_trunc_pair(n);
}
ComparisonTuple OnDemandPool::take_cmp(std::size_t n) {
    charge(cmp_key(n));
    record(cmp_key(n));
    return dealer_.gen_cmp_tuple(n);
}

OfflinePool::OfflinePool(Dealer& dealer, const RandomnessBudget& budget) {
    for (const auto& [key, count] : budget.planned) {
        for (u64 i = 0; i < count; ++i) {
            switch (key.kind) {
                case RandKind::BeaverElem:
                    beaver_[key].push_back(dealer.gen_beaver(key.dims[0]));
                    break;
                case RandKind::BeaverMatmul:
                    beaver_[key].push_back(dealer.gen_matmul(key.dims[0], key.dims[1], key.dims[2]));
                    break;
                case RandKind::TruncPair:
                    trunc_[key].push_back(dealer.gen_trunc_pair(key.dims[0]));
                    break;
                case RandKind::CmpTuple:
                    cmp_[key].push_back(dealer.gen_cmp_tuple(key.dims[0]));
                    break;
            }
        }
    }
}

BeaverTriple OfflinePool::take_beaver(std::size_t n) {
    auto key = beaver_key(n);
    auto it = beaver_.find(key);
    if (it == beaver_.end() || it->second.empty())
        throw ProtocolError("offline pool exhausted for " + key.str());
    BeaverTriple t = std::move(it->second.front());
    it->second.pop_front();
    record(key);
    return t;
}
BeaverTriple OfflinePool::take_matmul(std::uint32_t m, std::uint32_t k, std::uint32_t n) {
    auto key = matmul_key(m, k, n);
    auto it = beaver_.find(key);
    if (it == beaver_.end() || it->second.empty())
        throw ProtocolError("offline pool exhausted for " + key.str());
    BeaverTriple t = std::move(it->second.front());
    it->second.pop_front();
    record(key);
    return t;
}
TruncationPair OfflinePool::take_trunc(std::size_t n) {
    auto key = trunc_key(n);
    auto it = trunc_.find(key);
    if (it == trunc_.end() || it->second.empty())
        throw ProtocolError("offline pool exhausted for " + key.str());
    TruncationPair t = std::move(it->second.front());
    it->second.pop_front();
    record(key);
    return t;
}
ComparisonTuple OfflinePool::take_cmp(std::size_t n) {
    auto key = cmp_key(n);
    auto it = cmp_.find(key);
    if (it == cmp_.end() || it->second.empty())
        throw ProtocolError("offline pool exhausted for " + key.str());
    ComparisonTuple t = std::move(it->second.front());
    it->second.pop_front();
    record(key);
    return t;
}

// --- triple files ---

namespace {

void append_block(std::vector<std::uint8_t>& out, const SharedTensor& t, int party) {
    auto block = serialize_share_block(t, party);
    out.insert(out.end(), block.begin(), block.end());
}

void write_file(const std::string& path, RandKind kind, const std::vector<std::uint32_t>& shape,
                std::uint32_t count, const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> head;
    head.push_back(static_cast<std::uint8_t>(kind));
    put_le32(head, count);
    head.push_back(static_cast<std::uint8_t>(shape.size()));
    for (auto d : shape) put_le32(head, d);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot open triple file for writing: " + path);
    f.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
    f.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
}

std::vector<std::uint8_t> read_file(const std::string& path, RandKind expect_kind,
                                    std::uint32_t* count) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open triple file: " + path);
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    if (data.size() < 6) throw FormatError("triple file too short");
    if (data[0] != static_cast<std::uint8_t>(expect_kind)) throw FormatError("triple file kind mismatch");
    *count = get_le32(data.data() + 1);
    std::size_t rank = data[5];
    data.erase(data.begin(), data.begin() + 6 + static_cast<std::ptrdiff_t>(4 * rank));
    return data;
}

// Reads one share block into a fresh all-party tensor with this party's
// vector populated (other parties' files fill the rest).
SharedTensor read_block(const std::uint8_t*& p, std::size_t& len, int party, int parties) {
    std::size_t used = 0;
    SharedTensor one = parse_share_block(p, len, &used);
    p += used;
    len -= used;
    SharedTensor t(one.shape, parties, one.scale_exponent);
    t.shares[static_cast<std::size_t>(party)] = std::move(one.shares[0]);
    return t;
}

}  // namespace

void write_beaver_file(const std::string& path, const std::vector<BeaverTriple>& items, int party) {
    std::vector<std::uint8_t> payload;
    for (const auto& t : items) {
        append_block(payload, t.a, party);
        append_block(payload, t.b, party);
        append_block(payload, t.c, party);
    }
    RandKind kind = items.empty() || !items[0].matmul ? RandKind::BeaverElem : RandKind::BeaverMatmul;
    std::vector<std::uint32_t> shape = items.empty() ? std::vector<std::uint32_t>{} : items[0].a.shape;
    write_file(path, kind, shape, static_cast<std::uint32_t>(items.size()), payload);
}

std::vector<BeaverTriple> read_beaver_file(const std::string& path, int party, int parties) {
    std::uint32_t count = 0;
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw FormatError("cannot open triple file: " + path);
    char kind_byte = 0;
    probe.get(kind_byte);
    probe.close();
    auto kind = static_cast<RandKind>(kind_byte);
    auto data = read_file(path, kind, &count);
    const std::uint8_t* p = data.data();
    std::size_t len = data.size();
    std::vector<BeaverTriple> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        BeaverTriple t;
        t.matmul = kind == RandKind::BeaverMatmul;
        t.a = read_block(p, len, party, parties);
        t.b = read_block(p, len, party, parties);
        t.c = read_block(p, len, party, parties);
        out.push_back(std::move(t));
    }
    return out;
}

void write_trunc_file(const std::string& path, const std::vector<TruncationPair>& items, int party) {
    std::vector<std::uint8_t> payload;
    for (const auto& t : items) {
        append_block(payload, t.r, party);
        append_block(payload, t.r_hi, party);
        append_block(payload, t.r_bits, party);
        append_block(payload, t.r_lo_bits, party);
        put_le32(payload, static_cast<std::uint32_t>(t.aux.size()));
        for (const auto& a : t.aux) {
            append_block(payload, a.a, party);
            append_block(payload, a.b, party);
            append_block(payload, a.c, party);
        }
    }
    std::vector<std::uint32_t> shape = items.empty() ? std::vector<std::uint32_t>{} : items[0].r.shape;
    write_file(path, RandKind::TruncPair, shape, static_cast<std::uint32_t>(items.size()), payload);
}

std::vector<TruncationPair> read_trunc_file(const std::string& path, int party, int parties) {
    std::uint32_t count = 0;
    auto data = read_file(path, RandKind::TruncPair, &count);
    const std::uint8_t* p = data.data();
    std::size_t len = data.size();
    std::vector<TruncationPair> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        TruncationPair t;
        t.r = read_block(p, len, party, parties);
        t.r_hi = read_block(p, len, party, parties);
        t.r_bits = read_block(p, len, party, parties);
        t.r_lo_bits = read_block(p, len, party, parties);
        if (len < 4) throw FormatError("trunc file truncated");
        std::uint32_t naux = get_le32(p);
        p += 4;
        len -= 4;
        for (std::uint32_t j = 0; j < naux; ++j) {
            BeaverTriple a;
            a.a = read_block(p, len, party, parties);
            a.b = read_block(p, len, party, parties);
            a.c = read_block(p, len, party, parties);
            t.aux.push_back(std::move(a));
        }
        out.push_back(std::move(t));
    }
    return out;
}

void write_cmp_file(const std::string& path, const std::vector<ComparisonTuple>& items, int party) {
    std::vector<std::uint8_t> payload;
    for (const auto& t : items) {
        append_block(payload, t.r, party);
        append_block(payload, t.r_bits, party);
        append_block(payload, t.r_msb, party);
        put_le32(payload, static_cast<std::uint32_t>(t.aux.size()));
        for (const auto& a : t.aux) {
            append_block(payload, a.a, party);
            append_block(payload, a.b, party);
            append_block(payload, a.c, party);
        }
    }
    std::vector<std::uint32_t> shape = items.empty() ? std::vector<std::uint32_t>{} : items[0].r.shape;
    write_file(path, RandKind::CmpTuple, shape, static_cast<std::uint32_t>(items.size()), payload);
}

std::vector<ComparisonTuple> read_cmp_file(const std::string& path, int party, int parties) {
    std::uint32_t count = 0;
    auto data = read_file(path, RandKind::CmpTuple, &count);
    const std::uint8_t* p = data.data();
    std::size_t len = data.size();
    std::vector<ComparisonTuple> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        ComparisonTuple t;
        t.r = read_block(p, len, party, parties);
        t.r_bits = read_block(p, len, party, parties);
        t.r_msb = read_block(p, len, party, parties);
        if (len < 4) throw FormatError("cmp file truncated");
        std::uint32_t naux = get_le32(p);
        p += 4;
        len -= 4;
        for (std::uint32_t j = 0; j < naux; ++j) {
            BeaverTriple a;
            a.a = read_block(p, len, party, parties);
            a.b = read_block(p, len, party, parties);
            a.c = read_block(p, len, party, parties);
            t.aux.push_back(std::move(a));
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace scol
