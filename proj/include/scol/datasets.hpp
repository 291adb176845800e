#pragma once

#include <string>
#include <vector>

#include "scol/nn.hpp"
#include "scol/tensor.hpp"

namespace scol {

struct LabeledDataset {
    Tensor X;            // n x Q
    std::vector<int> y;  // labels in [0, classes)
    int classes = 0;

    std::size_t size() const { return y.size(); }
    std::size_t width() const { return X.cols(); }
    std::vector<std::size_t> label_histogram() const;
};

// IDX format: big-endian magic 0x803 (images) / 0x801 (labels), big-endian
// dims, unsigned byte payload. Pixels are scaled to [0,1].
LabeledDataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

// First existing of: $SCOL_DATA_DIR, ./data/mnist, ../data/mnist, /root/data/mnist.
std::string mnist_dir();

// (x - mean) / stdev over every feature; defaults are the usual MNIST
// pixel statistics
void standardize(LabeledDataset& d, double mean = 0.1307, double stdev = 0.3081);

// K class centroids at distinct corners of a +-1 hypercube in a 20-dim
// informative subspace, unit Gaussian noise, seeded Q x 20 mixing map.
LabeledDataset gen_synthetic(std::size_t n, std::uint32_t Q, int K, u64 seed);

struct FourWaySplit {
    LabeledDataset global, party1, party2, test;
};

// 29-feature two-class mixtures with overlap; exact per-split counts
// {global: 1000+100, party1: 1000+50, party2: 1000+242, test: 1000+100}.
FourWaySplit gen_fraud(u64 seed);

struct SplitSpec {
    std::size_t global_n = 0, party1_n = 0, party2_n = 0, test_n = 0;
    // per-label weights; favored labels get proportionally more samples
    std::vector<double> global_w, party1_w, party2_w;
};

// Table-I MNIST shape: sizes {12600, 23700, 23700}, 3:1 favored skew with
// global favoring {3,4,5}, party 1 {0,1,2}, party 2 {7,8,9}.
SplitSpec default_mnist_spec(int classes = 10, double favored_ratio = 3.0);

// Disjoint partitions with label histograms proportional to the skew weights
// (iterative proportional fitting against per-label availability).
FourWaySplit split(const LabeledDataset& d, const SplitSpec& spec, u64 seed);

// Uniform random subset without replacement, stratified by label;
// |result| = round(fraction * |d|).
LabeledDataset select_share_subset(const LabeledDataset& d, double fraction, u64 seed);

LabeledDataset concat_datasets(const LabeledDataset& a, const LabeledDataset& b);
LabeledDataset take_rows(const LabeledDataset& d, const std::vector<std::size_t>& idx);

// comma-separated rows, optional non-numeric header, last column = label
LabeledDataset load_delimited(const std::string& path);

}  // namespace scol
