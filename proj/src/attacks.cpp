#include "scol/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace scol {

AttackerAccess access_for(Method m, const ModelConfig& target) {
    AttackerAccess a;
    a.scenario = m;
    int L = static_cast<int>(target.num_layers());
    switch (m) {
        case Method::NC:
        case Method::CTFE:
            a.grad_from = 0;
            a.act_from = 0;
            break;
        case Method::SFE:
            a.grad_from = target.fe_layers;
            a.act_from = 0;
            break;
        case Method::LTFE:
            a.grad_from = target.fe_layers;
            a.act_from = L;  // no hidden activations
            break;
    }
    return a;
}

std::vector<ComponentSpec> feature_layout(const ModelConfig& cfg, const AttackerAccess& a) {
    std::vector<ComponentSpec> out;
    std::size_t K = cfg.output_width();
    out.push_back({"output", K});
    out.push_back({"loss", 1});
    out.push_back({"label", K});
    int L = static_cast<int>(cfg.num_layers());
    for (int l = a.act_from; l < L - 1; ++l)
        out.push_back({"act" + std::to_string(l), cfg.layer_sizes[static_cast<std::size_t>(l) + 1]});
    for (int l = a.grad_from; l < L; ++l)
        out.push_back({"grad" + std::to_string(l),
                       static_cast<std::size_t>(cfg.layer_sizes[static_cast<std::size_t>(l)]) *
                           cfg.layer_sizes[static_cast<std::size_t>(l) + 1]});
    return out;
}

FeatureVec build_features(const Model& target, const Tensor& x, int label,
                          const AttackerAccess& a) {
    if (x.rows() != 1) throw ShapeError("build_features: one sample row expected");
    int L = static_cast<int>(target.config.num_layers());
    Tensor onehot = one_hot({label}, static_cast<int>(target.config.output_width()));
    ForwardCache cache = forward(target, x);
    Gradients g = backward(target, cache, onehot);
    FeatureVec f;
    f.push_back(cache.output.data);
    f.push_back({mse_loss(cache.output, onehot)});
    f.push_back(onehot.data);
    for (int l = a.act_from; l < L - 1; ++l)
        f.push_back(cache.inputs[static_cast<std::size_t>(l) + 1].data);
    for (int l = a.grad_from; l < L; ++l) f.push_back(g.dW[static_cast<std::size_t>(l)].data);
    return f;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Tensor glorot(std::uint32_t rows, std::uint32_t cols, std::mt19937_64& rng) {
    Tensor t({rows, cols});
    double bound = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : t.data) v = dist(rng);
    return t;
}

Tensor stack_component(const std::vector<const FeatureVec*>& batch, std::size_t c,
                       const std::vector<double>& mean, const std::vector<double>& stdev) {
    std::size_t n = batch.size(), d = mean.size();
    Tensor out({static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(d)});
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double>& src = (*batch[i])[c];
        for (std::size_t j = 0; j < d; ++j) out.data[i * d + j] = (src[j] - mean[j]) / stdev[j];
    }
    return out;
}

struct HeadCache {
    std::vector<Tensor> E;  // per-component encoder outputs
    Tensor H, H1, H2;
    std::vector<double> p;
};

HeadCache attack_forward(const AttackModel& m, const std::vector<const FeatureVec*>& batch) {
    HeadCache c;
    std::size_t n = batch.size(), C = m.encW.size();
    c.H = Tensor({static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(64 * C)});
    for (std::size_t k = 0; k < C; ++k) {
        Tensor X = stack_component(batch, k, m.mean[k], m.stdev[k]);
        Tensor E = matmul(X, transpose(m.encW[k]));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 64; ++j)
                E.data[i * 64 + j] = std::max(0.0, E.data[i * 64 + j] + m.encB[k].data[j]);
        for (std::size_t i = 0; i < n; ++i)
            std::copy(&E.data[i * 64], &E.data[i * 64] + 64, &c.H.data[i * 64 * C + 64 * k]);
        c.E.push_back(std::move(E));
    }
    c.H1 = matmul(c.H, transpose(m.W1));
    for (std::size_t i = 0; i < c.H1.size(); ++i)
        c.H1.data[i] = std::max(0.0, c.H1.data[i] + m.b1.data[i % m.b1.size()]);
    c.H2 = matmul(c.H1, transpose(m.W2));
    for (std::size_t i = 0; i < c.H2.size(); ++i)
        c.H2.data[i] = std::max(0.0, c.H2.data[i] + m.b2.data[i % m.b2.size()]);
    c.p.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double z = m.bo;
        for (std::size_t j = 0; j < 64; ++j) z += m.Wo.data[j] * c.H2.data[i * 64 + j];
        c.p[i] = sigmoid(z);
    }
    return c;
}

void attack_sgd(AttackModel& m, const std::vector<const FeatureVec*>& batch,
                const std::vector<double>& y, double lr) {
    HeadCache c = attack_forward(m, batch);
    std::size_t n = batch.size(), C = m.encW.size();
    // dL/dz for mean BCE over the batch
    std::vector<double> dz(n);
    for (std::size_t i = 0; i < n; ++i) dz[i] = (c.p[i] - y[i]) / static_cast<double>(n);

    Tensor dH2({static_cast<std::uint32_t>(n), 64});
    Tensor dWo({1, 64});
    double dbo = 0;
    for (std::size_t i = 0; i < n; ++i) {
        dbo += dz[i];
        for (std::size_t j = 0; j < 64; ++j) {
            dWo.data[j] += dz[i] * c.H2.data[i * 64 + j];
            dH2.data[i * 64 + j] = dz[i] * m.Wo.data[j] * (c.H2.data[i * 64 + j] > 0 ? 1.0 : 0.0);
        }
    }
    Tensor dW2 = matmul(transpose(dH2), c.H1);
    Tensor db2({64});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 64; ++j) db2.data[j] += dH2.data[i * 64 + j];
    Tensor dH1 = matmul(dH2, m.W2);
    for (std::size_t i = 0; i < dH1.size(); ++i)
        if (c.H1.data[i] <= 0) dH1.data[i] = 0;
    Tensor dW1 = matmul(transpose(dH1), c.H);
    Tensor db1({128});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 128; ++j) db1.data[j] += dH1.data[i * 128 + j];
    Tensor dH = matmul(dH1, m.W1);
    for (std::size_t i = 0; i < dH.size(); ++i)
        if (c.H.data[i] <= 0) dH.data[i] = 0;

    for (std::size_t k = 0; k < C; ++k) {
        Tensor dE({static_cast<std::uint32_t>(n), 64});
        for (std::size_t i = 0; i < n; ++i)
            std::copy(&dH.data[i * 64 * C + 64 * k], &dH.data[i * 64 * C + 64 * k] + 64,
                      &dE.data[i * 64]);
        Tensor X = stack_component(batch, k, m.mean[k], m.stdev[k]);
        Tensor dWk = matmul(transpose(dE), X);
        for (std::size_t i = 0; i < m.encW[k].size(); ++i) m.encW[k].data[i] -= lr * dWk.data[i];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 64; ++j) m.encB[k].data[j] -= lr * dE.data[i * 64 + j];
    }
    for (std::size_t i = 0; i < m.W1.size(); ++i) m.W1.data[i] -= lr * dW1.data[i];
    for (std::size_t i = 0; i < 128; ++i) m.b1.data[i] -= lr * db1.data[i];
    for (std::size_t i = 0; i < m.W2.size(); ++i) m.W2.data[i] -= lr * dW2.data[i];
    for (std::size_t i = 0; i < 64; ++i) m.b2.data[i] -= lr * db2.data[i];
    for (std::size_t i = 0; i < 64; ++i) m.Wo.data[i] -= lr * dWo.data[i];
    m.bo -= lr * dbo;
}

}  // namespace

AttackModel train_attack(const std::vector<FeatureVec>& members,
                         const std::vector<FeatureVec>& nonmembers, u64 seed,
                         const AttackConfig& ac) {
    if (members.empty() || nonmembers.empty())
        throw std::invalid_argument("train_attack: both classes must be non-empty");
    std::mt19937_64 rng(seed);

    // balance by subsampling the larger class
    std::size_t per = std::min(members.size(), nonmembers.size());
    auto pick = [&](const std::vector<FeatureVec>& src) {
        std::vector<std::size_t> idx(src.size());
        std::iota(idx.begin(), idx.end(), 0u);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<const FeatureVec*> out;
        for (std::size_t i = 0; i < per; ++i) out.push_back(&src[idx[i]]);
        return out;
    };
    std::vector<const FeatureVec*> pool = pick(members);
    std::vector<double> labels(per, 1.0);
    for (const FeatureVec* f : pick(nonmembers)) pool.push_back(f);
    labels.resize(2 * per, 0.0);

    std::size_t C = pool[0]->size();
    AttackModel m;
    m.mean.resize(C);
    m.stdev.resize(C);
    for (std::size_t k = 0; k < C; ++k) {
        std::size_t d = (*pool[0])[k].size();
        m.mean[k].assign(d, 0.0);
        m.stdev[k].assign(d, 0.0);
        for (const FeatureVec* f : pool)
            for (std::size_t j = 0; j < d; ++j) m.mean[k][j] += (*f)[k][j];
        for (std::size_t j = 0; j < d; ++j) m.mean[k][j] /= static_cast<double>(pool.size());
        for (const FeatureVec* f : pool)
            for (std::size_t j = 0; j < d; ++j) {
                double dv = (*f)[k][j] - m.mean[k][j];
                m.stdev[k][j] += dv * dv;
            }
        for (std::size_t j = 0; j < d; ++j) {
            m.stdev[k][j] = std::sqrt(m.stdev[k][j] / static_cast<double>(pool.size()));
            if (m.stdev[k][j] < 1e-12) m.stdev[k][j] = 1.0;
        }
        m.encW.push_back(glorot(64, static_cast<std::uint32_t>(d), rng));
        m.encB.push_back(Tensor({64}));
    }
    m.W1 = glorot(128, static_cast<std::uint32_t>(64 * C), rng);
    m.b1 = Tensor({128});
    m.W2 = glorot(64, 128, rng);
    m.b2 = Tensor({64});
    m.Wo = glorot(1, 64, rng);

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0u);
    for (int e = 0; e < ac.epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t b = 0; b < pool.size(); b += ac.batch_size) {
            std::size_t hi = std::min(pool.size(), b + ac.batch_size);
            std::vector<const FeatureVec*> batch;
            std::vector<double> y;
            for (std::size_t i = b; i < hi; ++i) {
                batch.push_back(pool[order[i]]);
                y.push_back(labels[order[i]]);
            }
            attack_sgd(m, batch, y, ac.lr);
        }
    }
    return m;
}

double attack_score(const AttackModel& m, const FeatureVec& f) {
    std::vector<const FeatureVec*> one{&f};
    return attack_forward(m, one).p[0];
}

AttackReport evaluate_attack(const AttackModel& m, const std::vector<FeatureVec>& members,
                             const std::vector<FeatureVec>& nonmembers) {
    AttackReport r;
    for (const FeatureVec& f : members) r.member_scores.push_back(attack_score(m, f));
    for (const FeatureVec& f : nonmembers) r.nonmember_scores.push_back(attack_score(m, f));

    r.member_hist.assign(20, 0);
    r.nonmember_hist.assign(20, 0);
    auto bin = [](double p) { return std::min<std::size_t>(19, static_cast<std::size_t>(p * 20)); };
    for (double p : r.member_scores) r.member_hist[bin(p)] += 1;
    for (double p : r.nonmember_scores) r.nonmember_hist[bin(p)] += 1;

    // threshold sweep over the pooled scores, descending
    std::vector<double> thresholds;
    thresholds.insert(thresholds.end(), r.member_scores.begin(), r.member_scores.end());
    thresholds.insert(thresholds.end(), r.nonmember_scores.begin(), r.nonmember_scores.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    double nm = static_cast<double>(r.member_scores.size());
    double nn = static_cast<double>(r.nonmember_scores.size());
    r.roc.push_back({1.0, 0.0, 0.0});
    for (double t : thresholds) {
        double tp = 0, fp = 0;
        for (double p : r.member_scores) tp += p >= t;
        for (double p : r.nonmember_scores) fp += p >= t;
        r.roc.push_back({t, nm > 0 ? tp / nm : 0.0, nn > 0 ? fp / nn : 0.0});
    }
    if (r.roc.back().tpr != 1.0 || r.roc.back().fpr != 1.0) r.roc.push_back({0.0, 1.0, 1.0});
    r.auc = 0;
    for (std::size_t i = 1; i < r.roc.size(); ++i)
        r.auc += (r.roc[i].fpr - r.roc[i - 1].fpr) * (r.roc[i].tpr + r.roc[i - 1].tpr) / 2.0;
    return r;
}

namespace {

Tensor single_row(const Tensor& X, std::size_t r) {
    std::size_t w = X.cols();
    Tensor out({1, static_cast<std::uint32_t>(w)});
    std::copy(&X.data[r * w], &X.data[r * w] + w, out.data.begin());
    return out;
}

}  // namespace

std::vector<AttackReport> run_privacy_experiment(const ScenarioConfig& cfg,
                                                 const FourWaySplit& splits,
                                                 const std::vector<u64>& seeds,
                                                 const PrivacyOptions& opt) {
    std::vector<AttackReport> reports;
    for (u64 seed : seeds) {
        ScenarioConfig c = cfg;
        c.seed = seed;
        c.share_fraction = 1.0;  // the victim shares everything with the data-less attacker
        FourWaySplit s = splits;
        s.party1.X = Tensor({0, static_cast<std::uint32_t>(splits.party2.width())});
        s.party1.y.clear();
        s.party1.classes = splits.party2.classes;
        ScenarioResult r = run_scenario(c, s);

        Model target;
        AttackerAccess acc;
        if (c.method == Method::LTFE) {
            target = r.party_classifiers[0];
            acc = AttackerAccess{Method::LTFE, 0, static_cast<int>(target.config.num_layers())};
        } else {
            target = r.party_models[0];
            acc = access_for(c.method, target.config);
        }
        auto features = [&](const LabeledDataset& d, std::size_t row) {
            Tensor x = single_row(d.X, row);
            if (c.method == Method::LTFE) {
                Tensor e0 = fe_forward(r.party_models[0], x);
                Tensor e1 = fe_forward(r.party_models[1], x);
                Tensor w({1, static_cast<std::uint32_t>(e0.cols() + e1.cols())});
                std::copy(e0.data.begin(), e0.data.end(), w.data.begin());
                std::copy(e1.data.begin(), e1.data.end(), w.data.begin() + e0.cols());
                x = std::move(w);
            }
            return build_features(target, x, d.y[row], acc);
        };

        std::mt19937_64 rng(derive_seed(seed, 0xA77));
        std::size_t per = std::min(splits.party2.size(), splits.test.size());
        std::size_t n_train = std::min(opt.attack_train_per_class, per / 2);
        std::size_t n_eval = std::min(opt.attack_eval_per_class, per - n_train);
        auto draw = [&](const LabeledDataset& d) {
            std::vector<std::size_t> idx(d.size());
            std::iota(idx.begin(), idx.end(), 0u);
            std::shuffle(idx.begin(), idx.end(), rng);
            return idx;
        };
        std::vector<std::size_t> mi = draw(splits.party2), ni = draw(splits.test);
        std::vector<FeatureVec> tm, tn, em, en;
        for (std::size_t i = 0; i < n_train; ++i) {
            tm.push_back(features(splits.party2, mi[i]));
            tn.push_back(features(splits.test, ni[i]));
        }
        for (std::size_t i = n_train; i < n_train + n_eval; ++i) {
            em.push_back(features(splits.party2, mi[i]));
            en.push_back(features(splits.test, ni[i]));
        }
        AttackModel am = train_attack(tm, tn, derive_seed(seed, 0xA778), opt.attack);
        reports.push_back(evaluate_attack(am, em, en));
    }
    return reports;
}

}  // namespace scol
