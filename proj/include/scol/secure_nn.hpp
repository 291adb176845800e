#pragma once

#include "scol/mpc.hpp"
#include "scol/nn.hpp"

namespace scol {

struct SecureLayer {
    SharedTensor W, b;
};

// Same model definition as Model, executing over additive shares.
struct SecureModel {
    ModelConfig config;
    std::vector<SecureLayer> layers;
};

SecureModel share_model(SecureSession& s, const Model& m);
Model reveal_model(SecureSession& s, const SecureModel& m);

struct SecureCache {
    std::vector<SharedTensor> inputs;      // activation entering each layer
    std::vector<SharedTensor> deriv_bits;  // activation derivative as a shared 0/1 bit
    SharedTensor output;
};

SecureCache secure_forward(SecureSession& s, const SecureModel& m, const SharedTensor& x);

struct SecureGradients {
    std::vector<SharedTensor> dW, db;
};

SecureGradients secure_backward(SecureSession& s, const SecureModel& m, const SecureCache& cache,
                                const SharedTensor& onehot);

// theta <- theta - lr*(grad + l2*theta); one combined rescale per parameter tensor
void secure_sgd_step(SecureSession& s, SecureModel& m, const SecureGradients& g,
                     const TrainConfig& tc);

// forward + backward + update for one batch
void secure_train_batch(SecureSession& s, SecureModel& m, const SharedTensor& x,
                        const SharedTensor& onehot, const TrainConfig& tc);

// Exact correlated-randomness demand, derived by dry-running the secure batch
// against a counting pool; total = one batch x batches_per_epoch x epochs.
RandomnessBudget plan_train_budget(const ModelConfig& cfg, const TrainConfig& tc,
                                   std::size_t batches_per_epoch, int parties,
                                   const FixedPointCodec& codec);
RandomnessBudget plan_forward_budget(const ModelConfig& cfg, std::size_t batch_rows,
                                     std::size_t n_batches, int parties,
                                     const FixedPointCodec& codec);

}  // namespace scol
