#include "scol/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "scol/errors.hpp"

namespace scol {

std::vector<std::size_t> LabeledDataset::label_histogram() const {
    std::vector<std::size_t> h(static_cast<std::size_t>(classes), 0);
    for (int label : y) h[static_cast<std::size_t>(label)] += 1;
    return h;
}

namespace {

std::uint32_t read_be32(std::ifstream& f, const std::string& what) {
    std::uint8_t b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (f.gcount() != 4) throw FormatError("IDX file truncated reading " + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

}  // namespace

LabeledDataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw FormatError("cannot open IDX images: " + images_path);
    if (read_be32(imgs, "image magic") != 0x803) throw FormatError("bad IDX image magic");
    std::uint32_t n = read_be32(imgs, "image count");
    std::uint32_t rows = read_be32(imgs, "rows");
    std::uint32_t cols = read_be32(imgs, "cols");

    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs) throw FormatError("cannot open IDX labels: " + labels_path);
    if (read_be32(labs, "label magic") != 0x801) throw FormatError("bad IDX label magic");
    if (read_be32(labs, "label count") != n) throw FormatError("IDX image/label count mismatch");

    LabeledDataset d;
    d.classes = 10;
    d.X = Tensor({n, rows * cols});
    d.y.resize(n);
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(rows) * cols);
    for (std::uint32_t i = 0; i < n; ++i) {
        imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(imgs.gcount()) != buf.size())
            throw FormatError("IDX pixel payload truncated");
        for (std::size_t j = 0; j < buf.size(); ++j)
            d.X.data[i * buf.size() + j] = static_cast<double>(buf[j]) / 255.0;
        char lb;
        if (!labs.get(lb)) throw FormatError("IDX label payload truncated");
        d.y[i] = static_cast<std::uint8_t>(lb);
        if (d.y[i] > 9) throw FormatError("IDX label out of range");
    }
    return d;
}

std::string mnist_dir() {
    if (const char* env = std::getenv("SCOL_DATA_DIR")) return env;
    for (const char* cand : {"data/mnist", "../data/mnist", "/root/data/mnist"}) {
        std::ifstream probe(std::string(cand) + "/train-images-idx3-ubyte");
        if (probe) return cand;
    }
    return "data/mnist";
}

void standardize(LabeledDataset& d, double mean, double stdev) {
    if (stdev <= 0) throw RangeError("standardize: stdev must be positive");
    for (auto& v : d.X.data) v = (v - mean) / stdev;
}

LabeledDataset gen_synthetic(std::size_t n, std::uint32_t Q, int K, u64 seed) {
    constexpr int kInformative = 20;
    if (K > (1 << kInformative)) throw RangeError("too many classes for the hypercube");
    std::mt19937_64 rng(seed);

    // distinct hypercube corners per class
    std::vector<std::vector<double>> centroids;
    for (int k = 0; k < K; ++k) {
        std::vector<double> c(kInformative);
        u64 bits = rng();
        // corner scale 2: inter-class distance ~4*sqrt(10) vs unit noise
        for (int j = 0; j < kInformative; ++j) c[static_cast<std::size_t>(j)] = (bits >> j) & 1 ? 1.0 : -1.0;
        // regenerate on collision so corners stay distinct
        bool dup = false;
        for (const auto& other : centroids) dup = dup || other == c;
        if (dup) {
            --k;
            continue;
        }
        centroids.push_back(std::move(c));
    }

    // seeded mixing map, columns roughly unit-norm
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> mix(static_cast<std::size_t>(Q) * kInformative);
    for (auto& v : mix) v = gauss(rng) / std::sqrt(static_cast<double>(kInformative));

    LabeledDataset d;
    d.classes = K;
    d.X = Tensor({static_cast<std::uint32_t>(n), Q});
    d.y.resize(n);
    std::uniform_int_distribution<int> pick(0, K - 1);
    std::vector<double> z(kInformative);
    for (std::size_t i = 0; i < n; ++i) {
        int k = pick(rng);
        d.y[i] = k;
        for (int j = 0; j < kInformative; ++j)
            z[static_cast<std::size_t>(j)] = centroids[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] + gauss(rng);
        for (std::uint32_t f = 0; f < Q; ++f) {
            double acc = 0;
            for (int j = 0; j < kInformative; ++j)
                acc += mix[f * kInformative + static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(j)];
            d.X.data[i * Q + f] = acc / 4.0;  // keep features near [-1, 1]
        }
    }
    return d;
}

namespace {

LabeledDataset gen_fraud_block(std::mt19937_64& rng, std::size_t normals, std::size_t frauds) {
    constexpr std::uint32_t kF = 29;
    LabeledDataset d;
    d.classes = 2;
    d.X = Tensor({static_cast<std::uint32_t>(normals + frauds), kF});
    d.y.resize(normals + frauds);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < normals + frauds; ++i) {
        bool fraud = i >= normals;
        d.y[i] = fraud ? 1 : 0;
        double sign = (rng() & 1) ? 1.0 : -1.0;  // fraud: two overlapping modes
        for (std::uint32_t f = 0; f < kF; ++f) {
            double mu = 0.0;
            if (fraud && f < 8) mu = sign * 1.2;  // informative dims, overlapping
            d.X.data[i * kF + f] = mu + gauss(rng);
        }
    }
    // shuffle rows so class blocks are not positional
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    return take_rows(d, idx);
}

}  // namespace

FourWaySplit gen_fraud(u64 seed) {
    std::mt19937_64 rng(seed);
    FourWaySplit s;
    s.global = gen_fraud_block(rng, 1000, 100);
    s.party1 = gen_fraud_block(rng, 1000, 50);
    s.party2 = gen_fraud_block(rng, 1000, 242);
    s.test = gen_fraud_block(rng, 1000, 100);
    return s;
}

SplitSpec default_mnist_spec(int classes, double favored_ratio) {
    SplitSpec spec;
    spec.global_n = 12600;
    spec.party1_n = 23700;
    spec.party2_n = 23700;
    spec.test_n = 0;  // MNIST test comes from its own files
    spec.global_w.assign(static_cast<std::size_t>(classes), 1.0);
    spec.party1_w.assign(static_cast<std::size_t>(classes), 1.0);
    spec.party2_w.assign(static_cast<std::size_t>(classes), 1.0);
    for (int k : {3, 4, 5}) spec.global_w[static_cast<std::size_t>(k)] = favored_ratio;
    for (int k : {0, 1, 2}) spec.party1_w[static_cast<std::size_t>(k)] = favored_ratio;
    for (int k : {7, 8, 9}) spec.party2_w[static_cast<std::size_t>(k)] = favored_ratio;
    return spec;
}

LabeledDataset take_rows(const LabeledDataset& d, const std::vector<std::size_t>& idx) {
    LabeledDataset out;
    out.classes = d.classes;
    std::size_t w = d.width();
    out.X = Tensor({static_cast<std::uint32_t>(idx.size()), static_cast<std::uint32_t>(w)});
    out.y.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        std::copy_n(d.X.data.begin() + static_cast<std::ptrdiff_t>(idx[r] * w), w,
                    out.X.data.begin() + static_cast<std::ptrdiff_t>(r * w));
        out.y.push_back(d.y[idx[r]]);
    }
    return out;
}

LabeledDataset concat_datasets(const LabeledDataset& a, const LabeledDataset& b) {
    if (a.size() == 0) return b;
    if (b.size() == 0) return a;
    if (a.width() != b.width() || a.classes != b.classes)
        throw ShapeError("concat_datasets: incompatible datasets");
    LabeledDataset out;
    out.classes = a.classes;
    out.X = Tensor({static_cast<std::uint32_t>(a.size() + b.size()), static_cast<std::uint32_t>(a.width())});
    std::copy(a.X.data.begin(), a.X.data.end(), out.X.data.begin());
    std::copy(b.X.data.begin(), b.X.data.end(), out.X.data.begin() + static_cast<std::ptrdiff_t>(a.X.size()));
    out.y = a.y;
    out.y.insert(out.y.end(), b.y.begin(), b.y.end());
    return out;
}

namespace {

// Integer label-allocation table: rows = partitions (sizes fixed), columns =
// labels (availability capped). Iterative proportional fitting, then
// largest-remainder rounding, then greedy surplus moves.
std::vector<std::vector<std::size_t>> allocate(const std::vector<std::size_t>& sizes,
                                               const std::vector<std::vector<double>>& weights,
                                               const std::vector<std::size_t>& avail) {
    std::size_t P = sizes.size(), K = avail.size();
    std::size_t want = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    std::size_t have = std::accumulate(avail.begin(), avail.end(), std::size_t{0});
    if (want > have) throw AllocationError("split request exceeds source size");

    std::vector<std::vector<double>> t(P, std::vector<double>(K));
    for (std::size_t p = 0; p < P; ++p) {
        double wsum = std::accumulate(weights[p].begin(), weights[p].end(), 0.0);
        if (wsum <= 0) throw AllocationError("split weights must be positive");
        for (std::size_t k = 0; k < K; ++k)
            t[p][k] = static_cast<double>(sizes[p]) * weights[p][k] / wsum;
    }
    for (int iter = 0; iter < 200; ++iter) {
        for (std::size_t k = 0; k < K; ++k) {
            double col = 0;
            for (std::size_t p = 0; p < P; ++p) col += t[p][k];
            if (col > static_cast<double>(avail[k])) {
                double c = static_cast<double>(avail[k]) / col;
                for (std::size_t p = 0; p < P; ++p) t[p][k] *= c;
            }
        }
        for (std::size_t p = 0; p < P; ++p) {
            double row = std::accumulate(t[p].begin(), t[p].end(), 0.0);
            if (row <= 0) throw AllocationError("split infeasible under weights");
            double r = static_cast<double>(sizes[p]) / row;
            for (std::size_t k = 0; k < K; ++k) t[p][k] *= r;
        }
    }

    std::vector<std::vector<std::size_t>> out(P, std::vector<std::size_t>(K, 0));
    for (std::size_t p = 0; p < P; ++p) {
        std::size_t assigned = 0;
        std::vector<std::pair<double, std::size_t>> rem;
        for (std::size_t k = 0; k < K; ++k) {
            out[p][k] = static_cast<std::size_t>(t[p][k]);
            assigned += out[p][k];
            rem.push_back({t[p][k] - std::floor(t[p][k]), k});
        }
        std::sort(rem.rbegin(), rem.rend());
        for (std::size_t i = 0; assigned < sizes[p]; i = (i + 1) % K) {
            out[p][rem[i].second] += 1;
            ++assigned;
        }
    }
    // repair column overflows while keeping row sums exact
    for (std::size_t k = 0; k < K; ++k) {
        std::size_t col = 0;
        for (std::size_t p = 0; p < P; ++p) col += out[p][k];
        while (col > avail[k]) {
            bool moved = false;
            for (std::size_t p = 0; p < P && col > avail[k]; ++p) {
                if (out[p][k] == 0) continue;
                for (std::size_t k2 = 0; k2 < K; ++k2) {
                    if (k2 == k) continue;
                    std::size_t col2 = 0;
                    for (std::size_t q = 0; q < P; ++q) col2 += out[q][k2];
                    if (col2 < avail[k2]) {
                        out[p][k] -= 1;
                        out[p][k2] += 1;
                        --col;
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) throw AllocationError("split infeasible: label availability exhausted");
        }
    }
    return out;
}

}  // namespace

FourWaySplit split(const LabeledDataset& d, const SplitSpec& spec, u64 seed) {
    std::size_t K = static_cast<std::size_t>(d.classes);
    if (spec.global_w.size() != K || spec.party1_w.size() != K || spec.party2_w.size() != K)
        throw AllocationError("split spec weight width mismatch");
    std::vector<std::size_t> sizes = {spec.global_n, spec.party1_n, spec.party2_n};
    std::vector<std::vector<double>> weights = {spec.global_w, spec.party1_w, spec.party2_w};
    if (spec.test_n > 0) {
        sizes.push_back(spec.test_n);
        weights.emplace_back(K, 1.0);  // unskewed held-out split
    }
    auto counts = allocate(sizes, weights, d.label_histogram());

    // per-label index pools, seeded shuffle, consecutive disjoint blocks
    std::vector<std::vector<std::size_t>> pools(K);
    for (std::size_t i = 0; i < d.size(); ++i) pools[static_cast<std::size_t>(d.y[i])].push_back(i);
    std::mt19937_64 rng(seed);
    for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::size_t> cursor(K, 0);

    auto draw = [&](const std::vector<std::size_t>& want) {
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i < want[k]; ++i) idx.push_back(pools[k][cursor[k]++]);
        std::shuffle(idx.begin(), idx.end(), rng);
        return take_rows(d, idx);
    };

    FourWaySplit s;
    s.global = draw(counts[0]);
    s.party1 = draw(counts[1]);
    s.party2 = draw(counts[2]);
    if (spec.test_n > 0) s.test = draw(counts[3]);
    return s;
}

LabeledDataset select_share_subset(const LabeledDataset& d, double fraction, u64 seed) {
    if (fraction < 0 || fraction > 1) throw RangeError("share fraction must be in [0,1]");
    std::size_t want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(d.size())));
    if (want == d.size()) return d;

    std::vector<std::vector<std::size_t>> pools(static_cast<std::size_t>(d.classes));
    for (std::size_t i = 0; i < d.size(); ++i) pools[static_cast<std::size_t>(d.y[i])].push_back(i);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx;
    std::size_t taken = 0;
    for (auto& pool : pools) {
        std::shuffle(pool.begin(), pool.end(), rng);
        std::size_t share = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
        share = std::min(share, pool.size());
        for (std::size_t i = 0; i < share; ++i) idx.push_back(pool[i]);
        taken += share;
    }
    // largest pools absorb rounding drift so |D'| = round(fraction * |D|)
    for (std::size_t k = 0; taken < want; k = (k + 1) % pools.size()) {
        std::size_t used = 0;
        for (std::size_t i : idx)
            used += static_cast<std::size_t>(d.y[i] == static_cast<int>(k));
        if (used < pools[k].size()) {
            idx.push_back(pools[k][used]);
            ++taken;
        }
    }
    while (taken > want) {
        idx.pop_back();
        --taken;
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    return take_rows(d, idx);
}

LabeledDataset load_delimited(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open delimited file: " + path);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    int max_label = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                if (pos == 0) throw std::invalid_argument("empty");
                vals.push_back(v);
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty()) continue;  // header
            throw FormatError("non-numeric row in delimited file");
        }
        if (vals.size() < 2) throw FormatError("delimited row needs features and a label");
        if (!rows.empty() && vals.size() != rows[0].size() + 1)
            throw FormatError("ragged delimited file");
        int label = static_cast<int>(vals.back());
        if (label < 0 || static_cast<double>(label) != vals.back())
            throw FormatError("delimited label must be a non-negative integer");
        max_label = std::max(max_label, label);
        vals.pop_back();
        rows.push_back(std::move(vals));
        labels.push_back(label);
    }
    if (rows.empty()) throw FormatError("empty delimited file");
    LabeledDataset d;
    d.classes = max_label + 1;
    d.X = Tensor({static_cast<std::uint32_t>(rows.size()), static_cast<std::uint32_t>(rows[0].size())});
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), d.X.data.begin() + static_cast<std::ptrdiff_t>(i * rows[0].size()));
    d.y = std::move(labels);
    return d;
}

}  // namespace scol
