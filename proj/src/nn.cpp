#include "scol/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "scol/errors.hpp"

namespace scol {

Model init_weights(const ModelConfig& config, u64 seed) {
    if (config.fe_layers < 0 || static_cast<std::size_t>(config.fe_layers) >= config.num_layers())
        throw ShapeError("fe_layers must be below the layer count");
    Model m;
    m.config = config;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < config.layer_sizes.size(); ++l) {
        std::uint32_t fan_in = config.layer_sizes[l], fan_out = config.layer_sizes[l + 1];
        bool clamp_out = l + 2 == config.layer_sizes.size() &&
                         config.output_activation == Activation::SEMI_SIGMOID;
        // the clamp-style output layer starts mid-band with small weights so
        // every class unit has gradient from the first batch; elsewhere the
        // usual uniform(+-1/sqrt(fan_in)) scheme
        double bound = clamp_out ? 1.0 / static_cast<double>(fan_in)
                                 : 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        DenseLayer layer;
        layer.W = Tensor({fan_out, fan_in});
        for (auto& w : layer.W.data) w = dist(rng);
        layer.b = Tensor({fan_out});
        for (auto& v : layer.b.data) v = clamp_out ? 0.5 : dist(rng);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

double semi_sigmoid_scalar(double x) { return std::min(1.0, std::max(0.0, x)); }

ForwardCache forward(const Model& model, const Tensor& x) {
    if (x.cols() != model.config.input_width()) throw ShapeError("forward: input width mismatch");
    ForwardCache cache;
    Tensor a = x;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const DenseLayer& layer = model.layers[l];
        cache.inputs.push_back(a);
        Tensor z = matmul(a, transpose(layer.W));
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (std::size_t j = 0; j < z.cols(); ++j) z.at(i, j) += layer.b.data[j];
        cache.preacts.push_back(z);
        bool last = l + 1 == model.layers.size();
        Activation act = last ? model.config.output_activation : model.config.hidden_activation;
        a = z;
        if (act == Activation::RELU)
            for (auto& v : a.data) v = std::max(0.0, v);
        else
            for (auto& v : a.data) v = semi_sigmoid_scalar(v);
    }
    cache.output = std::move(a);
    return cache;
}

double mse_loss(const Tensor& pred, const Tensor& onehot) {
    if (pred.shape != onehot.shape) throw ShapeError("mse_loss: shape mismatch");
    double acc = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred.data[i] - onehot.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

Gradients backward(const Model& model, const ForwardCache& cache, const Tensor& onehot) {
    if (cache.preacts.size() != model.layers.size()) throw ProtocolError("backward: stale cache");
    if (cache.output.shape != onehot.shape) throw ShapeError("backward: label shape mismatch");
    std::size_t L = model.layers.size();
    Gradients g;
    g.dW.resize(L);
    g.db.resize(L);

    // dL/dpred for the mean over batch*classes
    Tensor dz = cache.output;
    double scale = 2.0 / static_cast<double>(onehot.size());
    for (std::size_t i = 0; i < dz.size(); ++i)
        dz.data[i] = scale * (cache.output.data[i] - onehot.data[i]);

    for (std::size_t l = L; l-- > 0;) {
        const Tensor& z = cache.preacts[l];
        bool last = l + 1 == L;
        Activation act = last ? model.config.output_activation : model.config.hidden_activation;
        for (std::size_t i = 0; i < dz.size(); ++i) {
            double zi = z.data[i];
            double deriv = act == Activation::RELU ? (zi > 0 ? 1.0 : 0.0)
                                                   : (zi > 0 && zi < 1 ? 1.0 : 0.0);
            dz.data[i] *= deriv;
        }
        g.dW[l] = matmul(transpose(dz), cache.inputs[l]);
        g.db[l] = Tensor({model.config.layer_sizes[l + 1]});
        for (std::size_t i = 0; i < dz.rows(); ++i)
            for (std::size_t j = 0; j < dz.cols(); ++j) g.db[l].data[j] += dz.at(i, j);
        Tensor da = matmul(dz, model.layers[l].W);
        if (l == 0) g.d_input = da;
        dz = std::move(da);
    }
    return g;
}

void sgd_step(Model& model, const Gradients& grads, const TrainConfig& tc) {
    if (grads.dW.size() != model.layers.size()) throw ShapeError("sgd_step: gradient count mismatch");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        DenseLayer& layer = model.layers[l];
        if (grads.dW[l].shape != layer.W.shape || grads.db[l].shape != layer.b.shape)
            throw ShapeError("sgd_step: gradient shape mismatch");
        for (std::size_t i = 0; i < layer.W.size(); ++i)
            layer.W.data[i] -= tc.lr * (grads.dW[l].data[i] + tc.l2 * layer.W.data[i]);
        for (std::size_t i = 0; i < layer.b.size(); ++i)
            layer.b.data[i] -= tc.lr * (grads.db[l].data[i] + tc.l2 * layer.b.data[i]);
    }
}

Tensor one_hot(const std::vector<int>& labels, int classes) {
    Tensor t({static_cast<std::uint32_t>(labels.size()), static_cast<std::uint32_t>(classes)});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) throw RangeError("one_hot: label out of range");
        t.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return t;
}

std::vector<int> argmax_rows(const Tensor& logits) {
    std::vector<int> out(logits.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        out[i] = static_cast<int>(best);
    }
    return out;
}

EvalResult evaluate_predictions(const std::vector<int>& pred, const std::vector<int>& labels,
                                int classes) {
    if (pred.size() != labels.size()) throw ShapeError("evaluate: prediction/label count mismatch");
    EvalResult r;
    r.confusion.assign(static_cast<std::size_t>(classes), std::vector<u64>(static_cast<std::size_t>(classes), 0));
    u64 correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        r.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(pred[i])] += 1;
        if (pred[i] == labels[i]) ++correct;
    }
    double n = static_cast<double>(pred.size());
    r.overall_accuracy = 100.0 * static_cast<double>(correct) / n;
    for (int k = 0; k < classes; ++k) {
        double tp = 0, fp = 0, fn = 0;
        for (int j = 0; j < classes; ++j) {
            if (j == k) continue;
            fn += static_cast<double>(r.confusion[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
            fp += static_cast<double>(r.confusion[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
        }
        tp = static_cast<double>(r.confusion[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)]);
        double tn = n - tp - fp - fn;
        LabelMetrics m;
        m.accuracy = 100.0 * (tp + tn) / n;
        m.precision = tp + fp > 0 ? 100.0 * tp / (tp + fp) : 0.0;
        m.recall = tp + fn > 0 ? 100.0 * tp / (tp + fn) : 0.0;
        m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        r.per_label.push_back(m);
    }
    return r;
}

EvalResult evaluate(const Model& model, const Tensor& x, const std::vector<int>& labels) {
    ForwardCache cache = forward(model, x);
    return evaluate_predictions(argmax_rows(cache.output), labels,
                                static_cast<int>(model.config.output_width()));
}

void save_model(const std::string& path, const Model& model) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot open model file for writing: " + path);
    f << "scol-model 1\n";
    f << "layers";
    for (auto s : model.config.layer_sizes) f << ' ' << s;
    f << "\nfe_layers " << model.config.fe_layers << "\nq " << model.config.q << "\n";
    auto dump = [&](const Tensor& t) {
        std::vector<std::uint8_t> buf;
        for (double v : t.data) {
            u64 bits;
            std::memcpy(&bits, &v, 8);
            put_le64(buf, bits);
        }
        f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    };
    for (const auto& layer : model.layers) {
        dump(layer.W);
        dump(layer.b);
    }
}

Model load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open model file: " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("scol-model 1", 0) != 0)
        throw FormatError("bad model file header");
    ModelConfig cfg;
    cfg.layer_sizes.clear();
    if (!std::getline(f, line) || line.rfind("layers", 0) != 0) throw FormatError("bad model layer line");
    {
        std::istringstream ss(line.substr(6));
        std::uint32_t v;
        while (ss >> v) cfg.layer_sizes.push_back(v);
    }
    if (cfg.layer_sizes.size() < 2) throw FormatError("model needs at least two layer sizes");
    if (!std::getline(f, line) || line.rfind("fe_layers ", 0) != 0) throw FormatError("bad fe_layers line");
    cfg.fe_layers = std::stoi(line.substr(10));
    if (!std::getline(f, line) || line.rfind("q ", 0) != 0) throw FormatError("bad q line");
    cfg.q = std::stoi(line.substr(2));

    Model m;
    m.config = cfg;
    auto slurp = [&](Tensor& t) {
        std::vector<char> buf(t.size() * 8);
        f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(f.gcount()) != buf.size()) throw FormatError("model file truncated");
        for (std::size_t i = 0; i < t.size(); ++i) {
            u64 bits = get_le64(reinterpret_cast<const std::uint8_t*>(buf.data()) + i * 8);
            std::memcpy(&t.data[i], &bits, 8);
        }
    };
    for (std::size_t l = 0; l + 1 < cfg.layer_sizes.size(); ++l) {
        DenseLayer layer;
        layer.W = Tensor({cfg.layer_sizes[l + 1], cfg.layer_sizes[l]});
        layer.b = Tensor({cfg.layer_sizes[l + 1]});
        slurp(layer.W);
        slurp(layer.b);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

}  // namespace scol
