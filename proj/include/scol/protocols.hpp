#pragma once

#include <string>
#include <vector>

#include "scol/datasets.hpp"
#include "scol/nn.hpp"
#include "scol/transport.hpp"

namespace scol {

enum class Method { NC, CTFE, SFE, LTFE };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct ScenarioConfig {
    Method method = Method::CTFE;
    double share_fraction = 0.3;  // ignored by NC
    TrainConfig train;
    ModelConfig model;
    bool secure = false;         // run exchange phases under MPC; off = plaintext substitution
    // joint-risk mode: one exchange phase over own + received together (CTFE
    // raw rows, SFE embeddings, LTFE concat features) instead of sequential
    // own-then-received fine-tuning
    bool mixed_batches = false;
    u64 seed = 1;
};

struct PhaseTiming {
    std::string phase;
    double seconds = 0;
};

struct MetricsRecord {
    std::string method;
    int party = 0;  // 1-based
    int label = 0;
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;  // x100
};

struct ScenarioResult {
    Method method = Method::NC;
    std::vector<Model> party_models;          // full per-party models (LTFE: local extractors)
    std::vector<Model> party_classifiers;     // LTFE concat-input classifiers; empty otherwise
    std::vector<EvalResult> party_eval;       // held-out test split only
    std::vector<TrafficStats> party_traffic;  // secure phases; empty when none ran
    std::vector<PhaseTiming> timings;
    u64 transcript_hash = 0;  // folded over every secure session in the run

    std::vector<MetricsRecord> metrics_records() const;
};

// splitmix step for deriving phase/party sub-seeds
u64 derive_seed(u64 base, u64 tag);

// deterministic SGD; per-epoch shuffle seeded by tc.seed, partial final batch dropped
void train_plaintext(Model& m, const LabeledDataset& d, const TrainConfig& tc);

// embedding: the first fe_layers layers under the hidden activation
Tensor fe_forward(const Model& m, const Tensor& x);

ScenarioResult run_nc(const ScenarioConfig& cfg, const FourWaySplit& splits);
ScenarioResult run_ctfe(const ScenarioConfig& cfg, const FourWaySplit& splits);
ScenarioResult run_sfe(const ScenarioConfig& cfg, const FourWaySplit& splits);
ScenarioResult run_ltfe(const ScenarioConfig& cfg, const FourWaySplit& splits);
ScenarioResult run_scenario(const ScenarioConfig& cfg, const FourWaySplit& splits);

// Private inference on owner-held rows of x: the owner's extractor runs
// locally, the foreign extractor and the classifier run under MPC; only the
// argmax is produced.
std::vector<int> ltfe_secure_infer(const std::vector<Model>& extractors, const Model& classifier,
                                   PartyId owner, const Tensor& x, u64 seed = 1);

struct SweepPoint {
    double fraction = 0;
    ScenarioResult result;
};
std::vector<SweepPoint> sweep_share_fraction(ScenarioConfig cfg, const FourWaySplit& splits,
                                             const std::vector<double>& fractions);

// Multiply-accumulate estimate for n samples, p parties, t epochs.
// CTFE = npt*(fe + cls), SFE = npt*cls, LTFE = npt*(fe + (p+1)*cls), NC = 0,
// where fe/cls are the per-sample forward MACs of the extractor/classifier.
u64 estimate_cost(const ModelConfig& arch, u64 n, u64 p, u64 t, Method method);

}  // namespace scol
