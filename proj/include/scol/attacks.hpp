#pragma once

#include <string>
#include <vector>

#include "scol/protocols.hpp"

namespace scol {

// What the attacking party can observe of the target model. Weight gradients
// are visible for layers >= grad_from; hidden-layer activations are visible
// for layers in [act_from, num_layers - 1). Output, loss, and label are
// always visible.
struct AttackerAccess {
    Method scenario = Method::CTFE;
    int grad_from = 0;
    int act_from = 0;
};

// CTFE: the whole fine-tuned model is on the attacker's side. SFE: the shared
// extractor is public (activations visible) but only the classifier was
// trained against the victim's data (classifier gradients). LTFE: classifier
// scope only.
AttackerAccess access_for(Method m, const ModelConfig& target);

struct ComponentSpec {
    std::string name;
    std::size_t dim = 0;
};
std::vector<ComponentSpec> feature_layout(const ModelConfig& cfg, const AttackerAccess& a);

// One feature vector per layout component, in layout order.
using FeatureVec = std::vector<std::vector<double>>;
FeatureVec build_features(const Model& target, const Tensor& x, int label,
                          const AttackerAccess& a);

struct AttackConfig {
    double lr = 0.001;
    int epochs = 50;
    std::size_t batch_size = 64;
};

// Per-component encoder MLPs (one hidden layer, width 64) feeding a (128, 64)
// binary head with sigmoid output; inputs standardized per dimension.
struct AttackModel {
    std::vector<Tensor> encW, encB;
    Tensor W1, b1, W2, b2, Wo;
    double bo = 0;
    std::vector<std::vector<double>> mean, stdev;
};

// Binary cross-entropy SGD; the larger class is subsampled to balance.
AttackModel train_attack(const std::vector<FeatureVec>& members,
                         const std::vector<FeatureVec>& nonmembers, u64 seed,
                         const AttackConfig& ac = {});

// membership probability in (0, 1)
double attack_score(const AttackModel& m, const FeatureVec& f);

struct RocPoint {
    double threshold = 0, tpr = 0, fpr = 0;
};

struct AttackReport {
    std::vector<double> member_scores, nonmember_scores;
    std::vector<RocPoint> roc;
    double auc = 0;
    std::vector<u64> member_hist, nonmember_hist;  // 20 bins over [0, 1]
};
AttackReport evaluate_attack(const AttackModel& m, const std::vector<FeatureVec>& members,
                             const std::vector<FeatureVec>& nonmembers);

struct PrivacyOptions {
    std::size_t attack_train_per_class = 500;
    std::size_t attack_eval_per_class = 500;
    AttackConfig attack;
};

// Target setup: the attacking party (party 1) has no data of its own and
// trains on everything the other party shares. Members are the victim's
// training samples; non-members come from the held-out test split, in equal
// counts. One report per seed.
std::vector<AttackReport> run_privacy_experiment(const ScenarioConfig& cfg,
                                                 const FourWaySplit& splits,
                                                 const std::vector<u64>& seeds,
                                                 const PrivacyOptions& opt = {});

}  // namespace scol
