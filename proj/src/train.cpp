#include "hsu/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace hsu {

namespace {

using ordered_json = nlohmann::ordered_json;

TensorPtr scene_room_loss(const Prediction& pred, int room_target) {
    return cross_entropy_rows(pred.room_logits, {room_target}, {1});
}

TensorPtr scene_region_loss(const Prediction& pred, const std::vector<int>& targets) {
    return cross_entropy_rows(pred.region_logits, targets, pred.mask);
}

} // namespace

void TrainConfig::validate() const {
    if (base_lr <= 0.0)
        throw DomainError("train config: learning rate must be positive");
    if (epochs < 1 || batch_size < 1)
        throw DomainError("train config: epochs and batch size must be >= 1");
}

std::string train_config_to_json(const TrainConfig& cfg) {
    ordered_json j;
    j["base_lr"] = cfg.base_lr;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["seed"] = cfg.seed;
    j["use_dropout"] = cfg.use_dropout;
    j["early_stop_room_acc"] = cfg.early_stop_room_acc;
    j["early_stop_region_acc"] = cfg.early_stop_region_acc;
    return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("train config JSON: ") + e.what());
    }
    TrainConfig cfg;
    auto pick = [&](const char* key, auto& field) {
        if (j.contains(key))
            field = j[key].get<std::decay_t<decltype(field)>>();
    };
    pick("base_lr", cfg.base_lr);
    pick("epochs", cfg.epochs);
    pick("batch_size", cfg.batch_size);
    pick("seed", cfg.seed);
    pick("use_dropout", cfg.use_dropout);
    pick("early_stop_room_acc", cfg.early_stop_room_acc);
    pick("early_stop_region_acc", cfg.early_stop_region_acc);
    return cfg;
}

double compute_lambda(double room_loss, double region_loss) {
    const double denom = room_loss + region_loss;
    if (denom == 0.0)
        return 0.5;
    return room_loss / denom;
}

MultitaskLoss combine_scene_losses(const std::vector<TensorPtr>& room_losses,
                                   const std::vector<TensorPtr>& region_losses) {
    if (room_losses.empty() || room_losses.size() != region_losses.size())
        throw DomainError("combine_scene_losses: empty or mismatched batch");
    const double inv_n = 1.0 / static_cast<double>(room_losses.size());

    auto mean_of = [&](const std::vector<TensorPtr>& parts) {
        TensorPtr acc = parts[0];
        for (size_t i = 1; i < parts.size(); ++i)
            acc = add(acc, parts[i]);
        return scale(acc, inv_n);
    };
    TensorPtr room = mean_of(room_losses);
    TensorPtr region = mean_of(region_losses);

    MultitaskLoss out;
    out.breakdown.room_loss = room->item();
    out.breakdown.region_loss = region->item();
    // Detached scalar: the blend weight is a constant for the backward pass.
    out.breakdown.lambda = compute_lambda(out.breakdown.room_loss, out.breakdown.region_loss);
    out.total = add(scale(room, out.breakdown.lambda),
                    scale(region, 1.0 - out.breakdown.lambda));
    out.breakdown.total = out.total->item();
    return out;
}

MultitaskLoss multitask_loss(const Prediction& pred, int room_target,
                             const std::vector<int>& region_targets) {
    bool any_region = false;
    for (size_t i = 0; i < pred.mask.size(); ++i)
        if (pred.mask[i] && region_targets[i] >= 0)
            any_region = true;
    if (room_target < 0 && !any_region)
        throw DomainError("multitask_loss: no valid targets");
    return combine_scene_losses({scene_room_loss(pred, room_target)},
                                {scene_region_loss(pred, region_targets)});
}

void sgd_step(ParamStore& params, double lr) {
    for (const auto& name : params.names()) {
        auto& t = params.get(name);
        if (t->grad.empty())
            continue;
        for (size_t i = 0; i < t->values.size(); ++i)
            t->values[i] -= lr * t->grad[i];
    }
}

MetricsReport evaluate(const std::function<Prediction(const TokenizedScene&)>& forward,
                       const std::vector<TokenizedScene>& tokens, int n_room_classes,
                       int n_region_classes) {
    ConfusionMatrix room_cm(n_room_classes);
    ConfusionMatrix region_cm(n_region_classes);
    for (const auto& tok : tokens) {
        Prediction pred = forward(tok);
        room_cm.accumulate(tok.room_target, pred.room_argmax());
        auto region_pred = pred.region_argmax();
        for (size_t i = 0; i < tok.attention_mask.size(); ++i) {
            if (tok.attention_mask[i] && tok.region_targets[i] >= 0)
                region_cm.accumulate(tok.region_targets[i], region_pred[i]);
        }
    }
    MetricsReport report;
    report.room = summarize(room_cm);
    report.region = summarize(region_cm);
    return report;
}

TrainHistory train_loop(ParamStore& params, const ForwardFn& forward,
                        const std::vector<TokenizedScene>& train_tokens,
                        const std::vector<TokenizedScene>& test_tokens,
                        const TrainConfig& cfg) {
    cfg.validate();
    if (train_tokens.empty())
        throw DomainError("train_loop: empty training set");

    const int n_room = [&] {
        int k = 0;
        for (const auto& t : train_tokens)
            k = std::max(k, t.room_target + 1);
        for (const auto& t : test_tokens)
            k = std::max(k, t.room_target + 1);
        return k;
    }();
    const int n_region = [&] {
        int k = 0;
        for (const auto& toks : {&train_tokens, &test_tokens})
            for (const auto& t : *toks)
                for (int target : t.region_targets)
                    k = std::max(k, target + 1);
        return k;
    }();

    Rng shuffle_rng(cfg.seed ^ 0x51a7b3c9d5e1f086ull);
    Rng dropout_rng(cfg.seed ^ 0x0d21c4e6f8a9b375ull);

    auto eval_forward = [&](const TokenizedScene& tok) {
        return forward(tok, false, nullptr);
    };
    auto test_loss = [&]() -> double {
        if (test_tokens.empty())
            return std::numeric_limits<double>::quiet_NaN();
        double room = 0.0, region = 0.0;
        for (const auto& tok : test_tokens) {
            Prediction pred = forward(tok, false, nullptr);
            room += scene_room_loss(pred, tok.room_target)->item();
            region += scene_region_loss(pred, tok.region_targets)->item();
        }
        room /= static_cast<double>(test_tokens.size());
        region /= static_cast<double>(test_tokens.size());
        double lambda = compute_lambda(room, region);
        return lambda * room + (1.0 - lambda) * region;
    };

    TrainHistory history;
    double best_test = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_values = params.snapshot_values();

    std::vector<size_t> order(train_tokens.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        double epoch_total = 0.0, epoch_room = 0.0, epoch_region = 0.0, epoch_lambda = 0.0;
        int n_batches = 0;
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(cfg.batch_size)) {
            size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
            params.zero_grad();
            std::vector<TensorPtr> room_losses, region_losses;
            for (size_t i = start; i < end; ++i) {
                const auto& tok = train_tokens[order[i]];
                Prediction pred = forward(tok, cfg.use_dropout, &dropout_rng);
                room_losses.push_back(scene_room_loss(pred, tok.room_target));
                region_losses.push_back(scene_region_loss(pred, tok.region_targets));
            }
            MultitaskLoss loss = combine_scene_losses(room_losses, region_losses);
            backward(loss.total);
            sgd_step(params, cfg.base_lr);

            epoch_total += loss.breakdown.total;
            epoch_room += loss.breakdown.room_loss;
            epoch_region += loss.breakdown.region_loss;
            epoch_lambda += loss.breakdown.lambda;
            ++n_batches;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_total = epoch_total / n_batches;
        rec.train_room_loss = epoch_room / n_batches;
        rec.train_region_loss = epoch_region / n_batches;
        rec.lambda = epoch_lambda / n_batches;

        MetricsReport train_metrics = evaluate(eval_forward, train_tokens, n_room, n_region);
        rec.train_room_acc = train_metrics.room.accuracy;
        rec.train_room_miou = train_metrics.room.miou;
        rec.train_region_acc = train_metrics.region.accuracy;
        rec.train_region_miou = train_metrics.region.miou;
        if (!test_tokens.empty()) {
            MetricsReport test_metrics = evaluate(eval_forward, test_tokens, n_room, n_region);
            rec.test_room_acc = test_metrics.room.accuracy;
            rec.test_room_miou = test_metrics.room.miou;
            rec.test_region_acc = test_metrics.region.accuracy;
            rec.test_region_miou = test_metrics.region.miou;
            rec.test_total = test_loss();
            if (rec.test_total < best_test) {
                best_test = rec.test_total;
                best_values = params.snapshot_values();
                history.best_epoch = epoch;
            }
        } else {
            rec.test_total = std::numeric_limits<double>::quiet_NaN();
            best_values = params.snapshot_values();
            history.best_epoch = epoch;
        }
        history.epochs.push_back(rec);

        if (cfg.early_stop_room_acc >= 0.0 && cfg.early_stop_region_acc >= 0.0 &&
            !test_tokens.empty() && rec.test_room_acc >= cfg.early_stop_room_acc &&
            rec.test_region_acc >= cfg.early_stop_region_acc)
            break;
    }

    params.restore_values(best_values);
    return history;
}

std::string history_to_json(const TrainHistory& history) {
    ordered_json j;
    j["best_epoch"] = history.best_epoch;
    j["epochs"] = ordered_json::array();
    for (const auto& rec : history.epochs) {
        ordered_json e;
        e["epoch"] = rec.epoch;
        e["train_total"] = rec.train_total;
        e["train_room_loss"] = rec.train_room_loss;
        e["train_region_loss"] = rec.train_region_loss;
        e["lambda"] = rec.lambda;
        e["test_total"] = rec.test_total;
        e["train_room_acc"] = rec.train_room_acc;
        e["train_room_miou"] = rec.train_room_miou;
        e["train_region_acc"] = rec.train_region_acc;
        e["train_region_miou"] = rec.train_region_miou;
        e["test_room_acc"] = rec.test_room_acc;
        e["test_room_miou"] = rec.test_room_miou;
        e["test_region_acc"] = rec.test_region_acc;
        e["test_region_miou"] = rec.test_region_miou;
        j["epochs"].push_back(std::move(e));
    }
    return j.dump(2);
}

std::vector<TokenizedScene> tokenize_all(const std::vector<SceneRecord>& scenes,
                                         const LabelVocab& vocab,
                                         const ClassVocab& room_classes,
                                         const ClassVocab& region_classes) {
    std::vector<TokenizedScene> out;
    out.reserve(scenes.size());
    for (const auto& scene : scenes)
        out.push_back(tokenize_scene(scene, vocab, room_classes, region_classes,
                                     static_cast<int>(scene.objects.size())));
    return out;
}

FitResult fit(const std::vector<SceneRecord>& train_scenes,
              const std::vector<SceneRecord>& test_scenes, ModelConfig model_cfg,
              const TrainConfig& train_cfg) {
    if (train_scenes.empty())
        throw DomainError("fit: empty training set");

    std::vector<SceneRecord> all = train_scenes;
    all.insert(all.end(), test_scenes.begin(), test_scenes.end());

    FitResult result;
    result.bundle.vocab = build_vocab(all);
    result.bundle.room_classes = build_room_classes(all);
    result.bundle.region_classes = build_region_classes(all);

    model_cfg.vocab_size = result.bundle.vocab.size();
    model_cfg.n_room_classes = result.bundle.room_classes.size();
    model_cfg.n_region_classes = result.bundle.region_classes.size();
    if (model_cfg.max_objects <= 0) {
        size_t mx = 1;
        for (const auto& scene : all)
            mx = std::max(mx, scene.objects.size());
        model_cfg.max_objects = static_cast<int>(mx);
    }
    result.bundle.cfg = model_cfg;
    result.bundle.model = std::make_shared<TbHsuModel>(model_cfg, train_cfg.seed);

    auto train_tokens = tokenize_all(train_scenes, result.bundle.vocab,
                                     result.bundle.room_classes,
                                     result.bundle.region_classes);
    auto test_tokens = tokenize_all(test_scenes, result.bundle.vocab,
                                    result.bundle.room_classes,
                                    result.bundle.region_classes);

    const TbHsuModel& model = *result.bundle.model;
    ForwardFn forward = [&model](const TokenizedScene& tok, bool training, Rng* rng) {
        return model.forward(tok, training, rng);
    };
    result.history = train_loop(result.bundle.model->params(), forward, train_tokens,
                                test_tokens, train_cfg);
    return result;
}

MetricsReport evaluate_bundle(const ModelBundle& bundle,
                              const std::vector<SceneRecord>& scenes) {
    auto tokens = tokenize_all(scenes, bundle.vocab, bundle.room_classes,
                               bundle.region_classes);
    const TbHsuModel& model = *bundle.model;
    return evaluate([&model](const TokenizedScene& tok) { return model.forward(tok); },
                    tokens, bundle.room_classes.size(), bundle.region_classes.size());
}

void save_bundle(const ModelBundle& bundle, const std::string& prefix) {
    bundle.model->params().save(prefix + ".ckpt");
    ordered_json j;
    j["format"] = "hsu-bundle-v1";
    j["model_config"] = ordered_json::parse(model_config_to_json(bundle.cfg));
    j["vocab"] = bundle.vocab.labels();
    j["room_classes"] = bundle.room_classes.names();
    j["region_classes"] = bundle.region_classes.names();
    std::ofstream out(prefix + ".json");
    if (!out)
        throw ParseError("cannot write bundle sidecar: " + prefix + ".json");
    out << j.dump(2) << "\n";
}

ModelBundle load_bundle(const std::string& prefix) {
    std::ifstream in(prefix + ".json");
    if (!in)
        throw ParseError("cannot open bundle sidecar: " + prefix + ".json");
    std::stringstream buf;
    buf << in.rdbuf();
    ordered_json j;
    try {
        j = ordered_json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bundle sidecar JSON: ") + e.what());
    }
    if (!j.contains("format") || j["format"] != "hsu-bundle-v1")
        throw ParseError("unrecognized bundle format in " + prefix + ".json");

    ModelBundle bundle;
    bundle.cfg = model_config_from_json(j.at("model_config").dump());
    bundle.vocab = LabelVocab(j.at("vocab").get<std::vector<std::string>>());
    bundle.room_classes =
        ClassVocab(j.at("room_classes").get<std::vector<std::string>>());
    bundle.region_classes =
        ClassVocab(j.at("region_classes").get<std::vector<std::string>>());
    bundle.model = std::make_shared<TbHsuModel>(bundle.cfg, 0);
    bundle.model->params().load(prefix + ".ckpt");
    return bundle;
}

} // namespace hsu
