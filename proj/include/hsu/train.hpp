#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hsu/metrics.hpp"
#include "hsu/model.hpp"
#include "hsu/scene.hpp"
#include "hsu/tensor.hpp"

namespace hsu {

struct TrainConfig {
    double base_lr = 1e-3;
    int epochs = 500;
    int batch_size = 8;
    std::uint64_t seed = 0;
    bool use_dropout = true;
    // Stop once test accuracy clears both thresholds; negative disables.
    double early_stop_room_acc = -1.0;
    double early_stop_region_acc = -1.0;

    void validate() const;
};

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);

struct LossBreakdown {
    double room_loss = 0.0;
    double region_loss = 0.0;
    double lambda = 0.0;
    double total = 0.0;
};

// lambda = L_room / (L_room + L_region), with the 0/0 case pinned to 0.5.
double compute_lambda(double room_loss, double region_loss);

struct MultitaskLoss {
    TensorPtr total; // scalar, differentiable; lambda enters as a constant
    LossBreakdown breakdown;
};

// Room cross-entropy plus mean region cross-entropy over valid slots,
// blended by the adaptive weight. No gradient flows through lambda.
MultitaskLoss multitask_loss(const Prediction& pred, int room_target,
                             const std::vector<int>& region_targets);

// Batch form: lambda comes from the batch means of the two losses.
MultitaskLoss combine_scene_losses(const std::vector<TensorPtr>& room_losses,
                                   const std::vector<TensorPtr>& region_losses);

// theta <- theta - lr * grad, over all parameters in stable order.
void sgd_step(ParamStore& params, double lr);

struct EpochRecord {
    int epoch = 0;
    double train_total = 0.0;
    double train_room_loss = 0.0;
    double train_region_loss = 0.0;
    double lambda = 0.0;       // mean over the epoch's batches
    double test_total = 0.0;
    double train_room_acc = 0.0, train_room_miou = 0.0;
    double train_region_acc = 0.0, train_region_miou = 0.0;
    double test_room_acc = 0.0, test_room_miou = 0.0;
    double test_region_acc = 0.0, test_region_miou = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1; // lowest test total loss
};

std::string history_to_json(const TrainHistory& history);

// Scene-level forward pass used by the generic training loop; `training`
// toggles dropout.
using ForwardFn = std::function<Prediction(const TokenizedScene&, bool training,
                                           Rng* dropout_rng)>;

// Seeded shuffle / batched SGD over pre-tokenized scenes. Parameters end up
// at the best-by-test-loss epoch.
TrainHistory train_loop(ParamStore& params, const ForwardFn& forward,
                        const std::vector<TokenizedScene>& train_tokens,
                        const std::vector<TokenizedScene>& test_tokens,
                        const TrainConfig& cfg);

MetricsReport evaluate(const std::function<Prediction(const TokenizedScene&)>& forward,
                       const std::vector<TokenizedScene>& tokens, int n_room_classes,
                       int n_region_classes);

// Trained model plus everything needed to run it on new scenes.
struct ModelBundle {
    ModelConfig cfg;
    LabelVocab vocab;
    ClassVocab room_classes;
    ClassVocab region_classes;
    std::shared_ptr<TbHsuModel> model;
};

struct FitResult {
    ModelBundle bundle;
    TrainHistory history;
};

// Builds vocab/class maps over both splits, tokenizes, trains a TB-HSU model.
FitResult fit(const std::vector<SceneRecord>& train_scenes,
              const std::vector<SceneRecord>& test_scenes, ModelConfig model_cfg,
              const TrainConfig& train_cfg);

MetricsReport evaluate_bundle(const ModelBundle& bundle,
                              const std::vector<SceneRecord>& scenes);

// prefix.ckpt (tensor data) + prefix.json (config, vocab, classes).
void save_bundle(const ModelBundle& bundle, const std::string& prefix);
ModelBundle load_bundle(const std::string& prefix);

// Tokenizes each scene at its own length; padding invariance makes the
// result equivalent to a shared fixed length.
std::vector<TokenizedScene> tokenize_all(const std::vector<SceneRecord>& scenes,
                                         const LabelVocab& vocab,
                                         const ClassVocab& room_classes,
                                         const ClassVocab& region_classes);

} // namespace hsu
