#include "scol/protocols.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "scol/dealer.hpp"
#include "scol/errors.hpp"
#include "scol/mpc.hpp"
#include "scol/secure_nn.hpp"

namespace scol {

std::string method_name(Method m) {
    switch (m) {
        case Method::NC: return "nc";
        case Method::CTFE: return "ctfe";
        case Method::SFE: return "sfe";
        case Method::LTFE: return "ltfe";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    std::string s;
    for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (s == "nc") return Method::NC;
    if (s == "ctfe") return Method::CTFE;
    if (s == "sfe") return Method::SFE;
    if (s == "ltfe") return Method::LTFE;
    throw FormatError("unknown method: " + name);
}

u64 derive_seed(u64 base, u64 tag) {
    u64 z = base + 0x9E3779B97F4A7C15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace {

double now_seconds() {
    using clk = std::chrono::steady_clock;
    return std::chrono::duration<double>(clk::now().time_since_epoch()).count();
}

struct PhaseClock {
    ScenarioResult& res;
    std::string name;
    double start = 0;
    PhaseClock(ScenarioResult& r, std::string n) : res(r), name(std::move(n)), start(now_seconds()) {}
    ~PhaseClock() { res.timings.push_back({name, now_seconds() - start}); }
};

Tensor gather_rows(const Tensor& X, const std::vector<std::size_t>& idx, std::size_t begin,
                   std::size_t count) {
    std::size_t w = X.cols();
    Tensor out({static_cast<std::uint32_t>(count), static_cast<std::uint32_t>(w)});
    for (std::size_t r = 0; r < count; ++r) {
        const double* src = &X.data[idx[begin + r] * w];
        std::copy(src, src + w, &out.data[r * w]);
    }
    return out;
}

Tensor hconcat(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) throw ShapeError("hconcat: row mismatch");
    std::size_t n = a.rows(), wa = a.cols(), wb = b.cols();
    Tensor out({static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(wa + wb)});
    for (std::size_t r = 0; r < n; ++r) {
        std::copy(&a.data[r * wa], &a.data[r * wa] + wa, &out.data[r * (wa + wb)]);
        std::copy(&b.data[r * wb], &b.data[r * wb] + wb, &out.data[r * (wa + wb) + wa]);
    }
    return out;
}

Tensor onehot_rows(const std::vector<int>& y, const std::vector<std::size_t>& idx,
                   std::size_t begin, std::size_t count, int classes) {
    std::vector<int> sel(count);
    for (std::size_t r = 0; r < count; ++r) sel[r] = y[idx[begin + r]];
    return one_hot(sel, classes);
}

void merge_traffic(TrafficStats& into, const TrafficStats& from) {
    for (auto& [label, ps] : from.phases) {
        PhaseStats& d = into.phases[label];
        d.bytes_out += ps.bytes_out;
        d.bytes_in += ps.bytes_in;
        d.rounds += ps.rounds;
        d.millis += ps.millis;
    }
}

void fold_transcript(u64& h, u64 piece) {
    h ^= piece;
    h *= 1099511628211ull;
}

struct SecurePhaseStats {
    std::vector<TrafficStats> traffic;
    u64 transcript = 0;
    bool ran = false;
};

void absorb(ScenarioResult& res, const SecurePhaseStats& sp) {
    if (!sp.ran) return;
    if (res.party_traffic.empty()) res.party_traffic.assign(sp.traffic.size(), TrafficStats{});
    for (std::size_t p = 0; p < sp.traffic.size(); ++p)
        merge_traffic(res.party_traffic[p], sp.traffic[p]);
    fold_transcript(res.transcript_hash, sp.transcript);
}

// MPC fine-tune of m on d; batch schedule identical to train_plaintext's.
SecurePhaseStats secure_train_run(Model& m, const LabeledDataset& d, const TrainConfig& tc,
                                  u64 session_seed, const std::string& label) {
    SecurePhaseStats out;
    std::size_t nb = d.size() / tc.batch_size;
    if (nb == 0 || tc.epochs <= 0) return out;
    FixedPointCodec codec;
    Dealer dealer(2, codec, derive_seed(session_seed, 0xDEA1));
    OnDemandPool pool(dealer, plan_train_budget(m.config, tc, nb, 2, codec));
    InProcNet net(2, derive_seed(session_seed, 0x11D));
    net.set_phase_label(label);
    SecureSession s(2, codec, &pool, &net, derive_seed(session_seed, 0x5EED));
    SecureModel sm = share_model(s, m);
    int classes = static_cast<int>(m.config.output_width());
    std::mt19937_64 order(tc.seed);
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0u);
    for (int e = 0; e < tc.epochs; ++e) {
        std::shuffle(idx.begin(), idx.end(), order);
        for (std::size_t b = 0; b < nb; ++b) {
            Tensor xb = gather_rows(d.X, idx, b * tc.batch_size, tc.batch_size);
            Tensor yb = onehot_rows(d.y, idx, b * tc.batch_size, tc.batch_size, classes);
            SharedTensor sx = share(s, xb);
            SharedTensor sy = share(s, yb);
            secure_train_batch(s, sm, sx, sy, tc);
        }
    }
    m = reveal_model(s, sm);
    out.traffic = {net.stats(0), net.stats(1)};
    out.transcript = net.transcript_hash();
    out.ran = true;
    return out;
}

ModelConfig classifier_config(const ModelConfig& full, int input_parties) {
    ModelConfig c;
    std::size_t fl = static_cast<std::size_t>(full.fe_layers);
    c.layer_sizes.clear();
    c.layer_sizes.push_back(full.layer_sizes[fl] * static_cast<std::uint32_t>(input_parties));
    for (std::size_t i = fl + 1; i < full.layer_sizes.size(); ++i)
        c.layer_sizes.push_back(full.layer_sizes[i]);
    c.hidden_activation = full.hidden_activation;
    c.output_activation = full.output_activation;
    c.fe_layers = 0;
    c.q = full.q;
    return c;
}

ModelConfig extractor_config(const ModelConfig& full) {
    ModelConfig c;
    std::size_t fl = static_cast<std::size_t>(full.fe_layers);
    c.layer_sizes.assign(full.layer_sizes.begin(), full.layer_sizes.begin() + fl + 1);
    c.hidden_activation = full.hidden_activation;
    c.output_activation = full.hidden_activation;  // fe layers are hidden layers
    c.fe_layers = 0;
    c.q = full.q;
    return c;
}

Model extractor_model(const Model& full) {
    Model fe;
    fe.config = extractor_config(full.config);
    fe.layers.assign(full.layers.begin(), full.layers.begin() + full.config.fe_layers);
    return fe;
}

// Classifier fine-tune over concatenated embeddings. When owner_party is 0 or
// 1, that party's embedding arrives as shares of a locally computed value and
// only the other extractor runs under MPC (its weights stay private). When
// owner_party is -1 (mixed batches with per-sample owners), both extractors
// run under MPC. models[] fixes the column order of the concatenated input.
SecurePhaseStats ltfe_secure_phase(Model& cls, const Model* models[2], int owner_party,
                                   const LabeledDataset& d, const TrainConfig& tc,
                                   u64 session_seed, const std::string& label) {
    SecurePhaseStats out;
    std::size_t nb = d.size() / tc.batch_size;
    if (nb == 0 || tc.epochs <= 0) return out;
    FixedPointCodec codec;
    std::size_t forwards = nb * static_cast<std::size_t>(tc.epochs);
    RandomnessBudget budget = plan_train_budget(cls.config, tc, nb, 2, codec);
    std::vector<Model> fsec;
    for (int p = 0; p < 2; ++p) {
        if (p == owner_party) continue;
        fsec.push_back(extractor_model(*models[p]));
        budget.merge(plan_forward_budget(fsec.back().config, tc.batch_size, forwards, 2, codec));
    }
    Dealer dealer(2, codec, derive_seed(session_seed, 0xDEA1));
    OnDemandPool pool(dealer, budget);
    InProcNet net(2, derive_seed(session_seed, 0x11D));
    net.set_phase_label(label);
    SecureSession s(2, codec, &pool, &net, derive_seed(session_seed, 0x5EED));
    SecureModel scls = share_model(s, cls);
    std::vector<SecureModel> sfe;
    for (auto& f : fsec) sfe.push_back(share_model(s, f));
    int classes = static_cast<int>(cls.config.output_width());
    std::mt19937_64 order(tc.seed);
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0u);
    for (int e = 0; e < tc.epochs; ++e) {
        std::shuffle(idx.begin(), idx.end(), order);
        for (std::size_t b = 0; b < nb; ++b) {
            Tensor xb = gather_rows(d.X, idx, b * tc.batch_size, tc.batch_size);
            Tensor yb = onehot_rows(d.y, idx, b * tc.batch_size, tc.batch_size, classes);
            SharedTensor sx = share(s, xb);
            std::vector<SharedTensor> embs;
            std::size_t next_secure = 0;
            for (int p = 0; p < 2; ++p) {
                if (p == owner_party)
                    embs.push_back(share(s, fe_forward(*models[p], xb)));
                else
                    embs.push_back(secure_forward(s, sfe[next_secure++], sx).output);
            }
            std::vector<const SharedTensor*> parts = {&embs[0], &embs[1]};
            SharedTensor w = concat_shared(parts, 1);
            SharedTensor sy = share(s, yb);
            secure_train_batch(s, scls, w, sy, tc);
        }
    }
    cls = reveal_model(s, scls);
    out.traffic = {net.stats(0), net.stats(1)};
    out.transcript = net.transcript_hash();
    out.ran = true;
    return out;
}

LabeledDataset embed_dataset(const Model& fe_owner, const LabeledDataset& d) {
    LabeledDataset e;
    e.X = fe_forward(fe_owner, d.X);
    e.y = d.y;
    e.classes = d.classes;
    return e;
}

std::string ptag(int party) { return "p" + std::to_string(party + 1); }

ScenarioResult run_ctfe_like(const ScenarioConfig& cfg, const FourWaySplit& splits,
                             Method label_as, double fraction) {
    ScenarioResult res;
    res.method = label_as;
    res.transcript_hash = 0xcbf29ce484222325ull;
    const LabeledDataset* own[2] = {&splits.party1, &splits.party2};
    for (int p = 0; p < 2; ++p) {
        int other = 1 - p;
        Model m = init_weights(cfg.model, derive_seed(cfg.seed, 100));
        LabeledDataset recv =
            select_share_subset(*own[other], fraction, derive_seed(cfg.seed, 300));
        if (cfg.mixed_batches) {
            TrainConfig tc = cfg.train;
            tc.seed = derive_seed(cfg.seed, 600);
            LabeledDataset joint = concat_datasets(*own[p], recv);
            PhaseClock clock(res, ptag(p) + ".mixed");
            if (cfg.secure)
                absorb(res, secure_train_run(m, joint, tc, derive_seed(cfg.seed, 610 + p),
                                             ptag(p) + ".mixed"));
            else
                train_plaintext(m, joint, tc);
        } else {
            TrainConfig tc1 = cfg.train;
            tc1.seed = derive_seed(cfg.seed, 200);
            {
                PhaseClock clock(res, ptag(p) + ".local");
                train_plaintext(m, *own[p], tc1);
            }
            TrainConfig tc2 = cfg.train;
            tc2.seed = derive_seed(cfg.seed, 400);
            PhaseClock clock(res, ptag(p) + ".secure");
            if (cfg.secure)
                absorb(res, secure_train_run(m, recv, tc2, derive_seed(cfg.seed, 510 + p),
                                             ptag(p) + ".secure"));
            else
                train_plaintext(m, recv, tc2);
        }
        res.party_eval.push_back(evaluate(m, splits.test.X, splits.test.y));
        res.party_models.push_back(std::move(m));
    }
    if (res.party_traffic.empty()) res.transcript_hash = 0;
    return res;
}

}  // namespace

void train_plaintext(Model& m, const LabeledDataset& d, const TrainConfig& tc) {
    std::size_t nb = d.size() / tc.batch_size;
    if (nb == 0 || tc.epochs <= 0) return;
    int classes = static_cast<int>(m.config.output_width());
    std::mt19937_64 order(tc.seed);
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0u);
    for (int e = 0; e < tc.epochs; ++e) {
        std::shuffle(idx.begin(), idx.end(), order);
        for (std::size_t b = 0; b < nb; ++b) {
            Tensor xb = gather_rows(d.X, idx, b * tc.batch_size, tc.batch_size);
            Tensor yb = onehot_rows(d.y, idx, b * tc.batch_size, tc.batch_size, classes);
            ForwardCache cache = forward(m, xb);
            Gradients g = backward(m, cache, yb);
            sgd_step(m, g, tc);
        }
    }
}

Tensor fe_forward(const Model& m, const Tensor& x) {
    Tensor a = x;
    for (int l = 0; l < m.config.fe_layers; ++l) {
        const DenseLayer& layer = m.layers[static_cast<std::size_t>(l)];
        Tensor z = matmul(a, transpose(layer.W));
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (std::size_t j = 0; j < z.cols(); ++j) z.at(i, j) += layer.b.data[j];
        if (m.config.hidden_activation == Activation::RELU)
            for (auto& v : z.data) v = std::max(0.0, v);
        else
            for (auto& v : z.data) v = semi_sigmoid_scalar(v);
        a = std::move(z);
    }
    return a;
}

ScenarioResult run_nc(const ScenarioConfig& cfg, const FourWaySplit& splits) {
    return run_ctfe_like(cfg, splits, Method::NC, 0.0);
}

ScenarioResult run_ctfe(const ScenarioConfig& cfg, const FourWaySplit& splits) {
    return run_ctfe_like(cfg, splits, Method::CTFE, cfg.share_fraction);
}

ScenarioResult run_sfe(const ScenarioConfig& cfg, const FourWaySplit& splits) {
    ScenarioResult res;
    res.method = Method::SFE;
    res.transcript_hash = 0xcbf29ce484222325ull;
    const LabeledDataset* own[2] = {&splits.party1, &splits.party2};

    Model gsh = init_weights(cfg.model, derive_seed(cfg.seed, 700));
    {
        TrainConfig tcg = cfg.train;
        tcg.seed = derive_seed(cfg.seed, 701);
        PhaseClock clock(res, "sfe.global");
        train_plaintext(gsh, splits.global, tcg);
    }
    ModelConfig ccfg = classifier_config(cfg.model, 1);
    for (int p = 0; p < 2; ++p) {
        int other = 1 - p;
        Model cls;  // continue from the globally trained classifier head
        cls.config = ccfg;
        cls.layers.assign(gsh.layers.begin() + cfg.model.fe_layers, gsh.layers.end());
        LabeledDataset recv = select_share_subset(*own[other], cfg.share_fraction,
                                                  derive_seed(cfg.seed, 300));
        // the owner computes embeddings of its shared subset in plaintext
        LabeledDataset emb_recv = embed_dataset(gsh, recv);
        if (cfg.mixed_batches) {
            LabeledDataset joint = concat_datasets(embed_dataset(gsh, *own[p]), emb_recv);
            TrainConfig tc = cfg.train;
            tc.seed = derive_seed(cfg.seed, 715);
            PhaseClock clock(res, ptag(p) + ".cls.mixed");
            if (cfg.secure)
                absorb(res, secure_train_run(cls, joint, tc, derive_seed(cfg.seed, 735 + p),
                                             ptag(p) + ".cls.mixed"));
            else
                train_plaintext(cls, joint, tc);
        } else {
            {
                TrainConfig tc1 = cfg.train;
                tc1.seed = derive_seed(cfg.seed, 710);
                LabeledDataset emb_own = embed_dataset(gsh, *own[p]);
                PhaseClock clock(res, ptag(p) + ".cls.own");
                train_plaintext(cls, emb_own, tc1);
            }
            TrainConfig tc2 = cfg.train;
            tc2.seed = derive_seed(cfg.seed, 720);
            PhaseClock clock(res, ptag(p) + ".cls.secure");
            if (cfg.secure)
                absorb(res, secure_train_run(cls, emb_recv, tc2, derive_seed(cfg.seed, 730 + p),
                                             ptag(p) + ".cls.secure"));
            else
                train_plaintext(cls, emb_recv, tc2);
        }
        Model full;
        full.config = cfg.model;
        full.layers.assign(gsh.layers.begin(), gsh.layers.begin() + cfg.model.fe_layers);
        full.layers.insert(full.layers.end(), cls.layers.begin(), cls.layers.end());
        res.party_eval.push_back(evaluate(full, splits.test.X, splits.test.y));
        res.party_models.push_back(std::move(full));
    }
    if (res.party_traffic.empty()) res.transcript_hash = 0;
    return res;
}

ScenarioResult run_ltfe(const ScenarioConfig& cfg, const FourWaySplit& splits) {
    ScenarioResult res;
    res.method = Method::LTFE;
    res.transcript_hash = 0xcbf29ce484222325ull;
    const LabeledDataset* own[2] = {&splits.party1, &splits.party2};

    std::vector<Model> local(2);
    for (int p = 0; p < 2; ++p) {
        local[p] = init_weights(cfg.model, derive_seed(cfg.seed, 800));
        TrainConfig tc = cfg.train;
        tc.seed = derive_seed(cfg.seed, 810);
        PhaseClock clock(res, ptag(p) + ".fe");
        train_plaintext(local[p], *own[p], tc);
    }

    ModelConfig ccfg = classifier_config(cfg.model, 2);
    for (int p = 0; p < 2; ++p) {
        int other = 1 - p;
        Model cls = init_weights(ccfg, derive_seed(cfg.seed, 820));
        LabeledDataset recv = select_share_subset(*own[other], cfg.share_fraction,
                                                  derive_seed(cfg.seed, 300));
        const Model* extractors[2] = {&local[0], &local[1]};
        // single classifier phase over the appended own + received rows; in
        // secure mode both extractors run under MPC since batch rows mix owners
        LabeledDataset d = concat_datasets(*own[p], recv);
        TrainConfig tc = cfg.train;
        tc.seed = derive_seed(cfg.seed, 830);
        {
            PhaseClock clock(res, ptag(p) + ".cls");
            if (cfg.secure) {
                absorb(res, ltfe_secure_phase(cls, extractors, -1, d, tc,
                                              derive_seed(cfg.seed, 840 + p), ptag(p) + ".cls"));
            } else {
                LabeledDataset emb;
                emb.X = hconcat(fe_forward(local[0], d.X), fe_forward(local[1], d.X));
                emb.y = d.y;
                emb.classes = d.classes;
                train_plaintext(cls, emb, tc);
            }
        }
        Tensor wtest =
            hconcat(fe_forward(local[0], splits.test.X), fe_forward(local[1], splits.test.X));
        res.party_eval.push_back(evaluate(cls, wtest, splits.test.y));
        res.party_classifiers.push_back(std::move(cls));
    }
    res.party_models = std::move(local);
    if (res.party_traffic.empty()) res.transcript_hash = 0;
    return res;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const FourWaySplit& splits) {
    switch (cfg.method) {
        case Method::NC: return run_nc(cfg, splits);
        case Method::CTFE: return run_ctfe(cfg, splits);
        case Method::SFE: return run_sfe(cfg, splits);
        case Method::LTFE: return run_ltfe(cfg, splits);
    }
    throw FormatError("unknown method");
}

std::vector<int> ltfe_secure_infer(const std::vector<Model>& extractors, const Model& classifier,
                                   PartyId owner, const Tensor& x, u64 seed) {
    if (extractors.size() != 2) throw ShapeError("ltfe_secure_infer: two extractors expected");
    int foreign = 1 - owner;
    FixedPointCodec codec;
    Model fsec = extractor_model(extractors[static_cast<std::size_t>(foreign)]);
    RandomnessBudget budget = plan_forward_budget(fsec.config, x.rows(), 1, 2, codec);
    budget.merge(plan_forward_budget(classifier.config, x.rows(), 1, 2, codec));
    Dealer dealer(2, codec, derive_seed(seed, 0xDEA1));
    OnDemandPool pool(dealer, budget);
    InProcNet net(2, derive_seed(seed, 0x11D));
    net.set_phase_label("infer");
    SecureSession s(2, codec, &pool, &net, derive_seed(seed, 0x5EED));
    SecureModel sfe = share_model(s, fsec);
    SecureModel scls = share_model(s, classifier);
    SharedTensor sx = share(s, x);
    SecureCache fc = secure_forward(s, sfe, sx);
    SharedTensor se = share(s, fe_forward(extractors[static_cast<std::size_t>(owner)], x));
    std::vector<const SharedTensor*> parts =
        owner == 0 ? std::vector<const SharedTensor*>{&se, &fc.output}
                   : std::vector<const SharedTensor*>{&fc.output, &se};
    SharedTensor w = concat_shared(parts, 1);
    SecureCache cc = secure_forward(s, scls, w);
    Tensor out = reconstruct(s, cc.output);  // opened toward the sample owner
    return argmax_rows(out);
}

std::vector<SweepPoint> sweep_share_fraction(ScenarioConfig cfg, const FourWaySplit& splits,
                                             const std::vector<double>& fractions) {
    std::vector<SweepPoint> out;
    for (double f : fractions) {
        cfg.share_fraction = f;
        out.push_back({f, run_scenario(cfg, splits)});
    }
    return out;
}

u64 estimate_cost(const ModelConfig& arch, u64 n, u64 p, u64 t, Method method) {
    u64 fe = 0, cls = 0;
    for (std::size_t i = 0; i + 1 < arch.layer_sizes.size(); ++i) {
        u64 macs = static_cast<u64>(arch.layer_sizes[i]) * arch.layer_sizes[i + 1];
        if (i < static_cast<std::size_t>(arch.fe_layers))
            fe += macs;
        else
            cls += macs;
    }
    switch (method) {
        case Method::NC: return 0;
        case Method::CTFE: return n * p * t * (fe + cls);
        case Method::SFE: return n * p * t * cls;
        case Method::LTFE: return n * p * t * (fe + (p + 1) * cls);
    }
    return 0;
}

std::vector<MetricsRecord> ScenarioResult::metrics_records() const {
    std::vector<MetricsRecord> out;
    for (std::size_t p = 0; p < party_eval.size(); ++p) {
        const EvalResult& ev = party_eval[p];
        for (std::size_t l = 0; l < ev.per_label.size(); ++l) {
            const LabelMetrics& m = ev.per_label[l];
            out.push_back({method_name(method), static_cast<int>(p) + 1, static_cast<int>(l),
                           m.accuracy, m.precision, m.recall, m.f1});
        }
    }
    return out;
}

}  // namespace scol
