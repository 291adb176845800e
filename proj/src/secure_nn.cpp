#include "scol/secure_nn.hpp"

namespace scol {

SecureModel share_model(SecureSession& s, const Model& m) {
    SecureModel out;
    out.config = m.config;
    for (const auto& layer : m.layers)
        out.layers.push_back({share(s, layer.W), share(s, layer.b)});
    return out;
}

Model reveal_model(SecureSession& s, const SecureModel& m) {
    Model out;
    out.config = m.config;
    for (const auto& layer : m.layers)
        out.layers.push_back({reconstruct(s, layer.W), reconstruct(s, layer.b)});
    return out;
}

SecureCache secure_forward(SecureSession& s, const SecureModel& m, const SharedTensor& x) {
    if (x.cols() != m.config.layer_sizes.front()) throw ShapeError("secure_forward: width mismatch");
    SecureCache cache;
    SharedTensor a = x;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        cache.inputs.push_back(a);
        SharedTensor wt = transpose_shared(m.layers[l].W);
        SharedTensor z = matmul_fixed(s, a, wt);
        z = add_row_broadcast(z, m.layers[l].b);
        bool last = l + 1 == m.layers.size();
        if (!last) {
            SharedTensor bit;
            a = relu(s, z, &bit);
            cache.deriv_bits.push_back(std::move(bit));
        } else {
            SharedTensor gt0, ge1;
            a = semi_sigmoid(s, z, &gt0, &ge1);
            // derivative bit [0 < z < 1] = [z > 0] * (1 - [z >= 1])
            SharedTensor lt1 = add_public_scalar_ring(neg_shared(ge1), 1);
            SharedTensor bit = mul_secure(s, gt0, lt1);
            cache.deriv_bits.push_back(std::move(bit));
        }
    }
    cache.output = std::move(a);
    return cache;
}

SecureGradients secure_backward(SecureSession& s, const SecureModel& m, const SecureCache& cache,
                                const SharedTensor& onehot) {
    if (cache.inputs.size() != m.layers.size()) throw ProtocolError("secure_backward: stale cache");
    std::size_t L = m.layers.size();
    SecureGradients g;
    g.dW.resize(L);
    g.db.resize(L);

    SharedTensor diff = sub_shared(cache.output, onehot);
    double scale = 2.0 / static_cast<double>(onehot.size());
    SharedTensor dz = truncate_secure(s, mul_public_real(s, diff, scale));

    for (std::size_t l = L; l-- > 0;) {
        dz = mul_secure(s, dz, cache.deriv_bits[l]);  // bit product, no rescale needed
        g.dW[l] = matmul_fixed(s, transpose_shared(dz), cache.inputs[l]);
        g.db[l] = sum_rows(dz);
        if (l > 0) dz = matmul_fixed(s, dz, m.layers[l].W);
    }
    return g;
}

namespace {

SharedTensor combined_update(SecureSession& s, const SharedTensor& param, const SharedTensor& grad,
                             const TrainConfig& tc) {
    SharedTensor step = add_shared(mul_public_real(s, grad, tc.lr),
                                   mul_public_real(s, param, tc.lr * tc.l2));
    return truncate_secure(s, step);
}

}  // namespace

void secure_sgd_step(SecureSession& s, SecureModel& m, const SecureGradients& g,
                     const TrainConfig& tc) {
    if (g.dW.size() != m.layers.size()) throw ShapeError("secure_sgd_step: gradient count mismatch");
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        m.layers[l].W = sub_shared(m.layers[l].W, combined_update(s, m.layers[l].W, g.dW[l], tc));
        m.layers[l].b = sub_shared(m.layers[l].b, combined_update(s, m.layers[l].b, g.db[l], tc));
    }
}

void secure_train_batch(SecureSession& s, SecureModel& m, const SharedTensor& x,
                        const SharedTensor& onehot, const TrainConfig& tc) {
    SecureCache cache = secure_forward(s, m, x);
    SecureGradients g = secure_backward(s, m, cache, onehot);
    secure_sgd_step(s, m, g, tc);
}

namespace {

SecureModel zero_model(const ModelConfig& cfg, int parties) {
    SecureModel m;
    m.config = cfg;
    for (std::size_t l = 0; l + 1 < cfg.layer_sizes.size(); ++l) {
        SecureLayer layer;
        layer.W = SharedTensor({cfg.layer_sizes[l + 1], cfg.layer_sizes[l]}, parties, 1);
        layer.b = SharedTensor({cfg.layer_sizes[l + 1]}, parties, 1);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

}  // namespace

RandomnessBudget plan_train_budget(const ModelConfig& cfg, const TrainConfig& tc,
                                   std::size_t batches_per_epoch, int parties,
                                   const FixedPointCodec& codec) {
    CountingPool pool(parties, codec.scale);
    SecureSession dry(parties, codec, &pool, nullptr, 0);
    SecureModel m = zero_model(cfg, parties);
    SharedTensor x({static_cast<std::uint32_t>(tc.batch_size), cfg.layer_sizes.front()}, parties, 1);
    SharedTensor y({static_cast<std::uint32_t>(tc.batch_size), cfg.layer_sizes.back()}, parties, 1);
    secure_train_batch(dry, m, x, y, tc);
    return pool.consumed().scaled(batches_per_epoch * static_cast<u64>(tc.epochs));
}

RandomnessBudget plan_forward_budget(const ModelConfig& cfg, std::size_t batch_rows,
                                     std::size_t n_batches, int parties,
                                     const FixedPointCodec& codec) {
    CountingPool pool(parties, codec.scale);
    SecureSession dry(parties, codec, &pool, nullptr, 0);
    SecureModel m = zero_model(cfg, parties);
    SharedTensor x({static_cast<std::uint32_t>(batch_rows), cfg.layer_sizes.front()}, parties, 1);
    secure_forward(dry, m, x);
    return pool.consumed().scaled(n_batches);
}

}  // namespace scol
