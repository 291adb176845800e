#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scol/ring.hpp"
#include "scol/tensor.hpp"

namespace scol {

enum class Activation { RELU, SEMI_SIGMOID };

// out x in weights, length-out bias.
struct DenseLayer {
    Tensor W;
    Tensor b;
};

struct ModelConfig {
    std::vector<std::uint32_t> layer_sizes = {784, 64, 64, 64, 10};
    Activation hidden_activation = Activation::RELU;
    Activation output_activation = Activation::SEMI_SIGMOID;
    int fe_layers = 3;  // feature extractor = all but the last layer
    int q = 64;         // embedding width

    std::size_t num_layers() const { return layer_sizes.size() - 1; }
    std::uint32_t input_width() const { return layer_sizes.front(); }
    std::uint32_t output_width() const { return layer_sizes.back(); }
};

struct TrainConfig {
    double lr = 0.1;
    double l2 = 0.0002;
    int epochs = 10;
    std::size_t batch_size = 32;
    u64 seed = 1;
};

struct Model {
    ModelConfig config;
    std::vector<DenseLayer> layers;
};

// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
Model init_weights(const ModelConfig& config, u64 seed);

// semi-sigmoid: relu(x) - relu(x-1) = clamp(x, 0, 1)
double semi_sigmoid_scalar(double x);

struct ForwardCache {
    std::vector<Tensor> inputs;    // activation entering each layer
    std::vector<Tensor> preacts;   // z = x W^T + b per layer
    Tensor output;
};

// x is batch x input_width; output batch x output_width.
ForwardCache forward(const Model& model, const Tensor& x);

// mean over batch and classes of squared difference
double mse_loss(const Tensor& pred, const Tensor& onehot);

struct Gradients {
    std::vector<Tensor> dW, db;
    Tensor d_input;  // gradient wrt the model input (attack feature plumbing)
};

// Backprop through MSE; semi-sigmoid derivative is 1 on (0,1) and 0 outside
// (including both kinks), ReLU derivative is 0 at x <= 0.
Gradients backward(const Model& model, const ForwardCache& cache, const Tensor& onehot);

// theta <- theta - lr * (grad + l2 * theta), weights and biases alike
void sgd_step(Model& model, const Gradients& grads, const TrainConfig& tc);

Tensor one_hot(const std::vector<int>& labels, int classes);
std::vector<int> argmax_rows(const Tensor& logits);

struct LabelMetrics {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;  // x100
};

struct EvalResult {
    std::vector<LabelMetrics> per_label;
    std::vector<std::vector<u64>> confusion;  // [true][pred]
    double overall_accuracy = 0;              // x100
};

EvalResult evaluate(const Model& model, const Tensor& x, const std::vector<int>& labels);
// metrics for already-computed predictions (secure inference paths)
EvalResult evaluate_predictions(const std::vector<int>& pred, const std::vector<int>& labels,
                                int classes);

// text header (layer sizes) + binary f64 little-endian parameters
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace scol
