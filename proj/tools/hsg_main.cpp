#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsu/baselines.hpp"
#include "hsu/graph.hpp"
#include "hsu/metrics.hpp"
#include "hsu/model.hpp"
#include "hsu/prompt.hpp"
#include "hsu/scene.hpp"
#include "hsu/synth.hpp"
#include "hsu/train.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw hsu::ParseError("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw hsu::ParseError("cannot write file: " + path);
    out << text;
}

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Every command drops a manifest next to its outputs so runs can be
// reproduced and compared.
struct ManifestWriter {
    std::string command;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<std::string> config_blobs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void write(const std::string& path) const {
        ordered_json j;
        j["command"] = command;
        std::string cat;
        for (const auto& blob : config_blobs)
            cat += blob;
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(fnv1a(cat)));
        j["config_hash"] = hash;
        j["seed"] = seed;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        j["tool_version"] = kToolVersion;
        j["wall_clock_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        write_file(path, j.dump(2) + "\n");
    }
};

std::vector<hsu::SceneRecord> load_scene_dir(const std::string& dir) {
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json")
            continue;
        std::string name = entry.path().filename().string();
        if (name == "manifest.json" || name == "synth_config.json")
            continue;
        paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty())
        throw hsu::DomainError("no scene files in " + dir);
    std::vector<hsu::SceneRecord> scenes;
    scenes.reserve(paths.size());
    for (const auto& p : paths)
        scenes.push_back(hsu::filter_structural(hsu::load_scene(p)));
    return scenes;
}

ordered_json prediction_to_json(const hsu::ModelBundle& bundle,
                                const hsu::SceneRecord& scene,
                                const hsu::Prediction& pred) {
    ordered_json j;
    j["scan_id"] = scene.scan_id;
    j["room_type"] = bundle.room_classes.name_of(pred.room_argmax());
    j["objects"] = ordered_json::array();
    auto region_pred = pred.region_argmax();
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        ordered_json obj;
        obj["id"] = scene.objects[i].object_id;
        obj["label"] = scene.objects[i].semantic_label;
        obj["region_affordance"] = bundle.region_classes.name_of(region_pred[i]);
        j["objects"].push_back(std::move(obj));
    }
    return j;
}

std::vector<std::string> predict_region_affordances(const hsu::ModelBundle& bundle,
                                                    const hsu::SceneRecord& scene,
                                                    std::string* room_type_out) {
    auto tok = hsu::tokenize_scene(scene, bundle.vocab, bundle.room_classes,
                                   bundle.region_classes,
                                   static_cast<int>(scene.objects.size()));
    auto pred = bundle.model->forward(tok);
    if (room_type_out)
        *room_type_out = bundle.room_classes.name_of(pred.room_argmax());
    auto region_pred = pred.region_argmax();
    std::vector<std::string> out;
    for (size_t i = 0; i < scene.objects.size(); ++i)
        out.push_back(bundle.region_classes.name_of(region_pred[i]));
    return out;
}

// tokenize_scene needs the ground-truth room type in the class list; for
// inference on unlabeled scenes we substitute a known class before
// tokenizing (the target is not used in the forward pass).
hsu::SceneRecord with_known_room_type(const hsu::ModelBundle& bundle,
                                      hsu::SceneRecord scene) {
    bool known = true;
    try {
        bundle.room_classes.index_of(scene.room_type);
    } catch (const hsu::DomainError&) {
        known = false;
    }
    if (!known)
        scene.room_type = bundle.room_classes.name_of(0);
    return scene;
}

int cmd_synth(const std::string& config_path, const std::string& preset, int n,
              const std::string& out_dir, std::uint64_t seed, bool seed_given) {
    hsu::SynthConfig cfg;
    std::string blob;
    if (!config_path.empty()) {
        blob = read_file(config_path);
        cfg = hsu::synth_config_from_json(blob);
    } else if (preset == "ambiguous") {
        cfg = hsu::make_ambiguous_config(seed);
    } else {
        cfg = hsu::make_default_config(seed);
    }
    if (seed_given)
        cfg.seed = seed;
    cfg.validate();

    fs::create_directories(out_dir);
    ManifestWriter manifest;
    manifest.command = "synth";
    manifest.seed = cfg.seed;
    manifest.config_blobs.push_back(hsu::synth_config_to_json(cfg));
    write_file((fs::path(out_dir) / "synth_config.json").string(),
               hsu::synth_config_to_json(cfg) + "\n");

    for (int i = 0; i < n; ++i) {
        auto scene = hsu::generate_scene(cfg, static_cast<std::uint64_t>(i));
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%05d.json", i);
        std::string path = (fs::path(out_dir) / name).string();
        hsu::save_scene(scene, path);
        manifest.outputs.push_back(path);
    }
    manifest.write((fs::path(out_dir) / "manifest.json").string());
    std::cout << "wrote " << n << " scenes to " << out_dir << "\n";
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& test_dir,
              const std::string& out_dir, const std::string& model_cfg_path,
              const std::string& train_cfg_path, int epochs_override,
              double lr_override, std::uint64_t seed, bool seed_given,
              double split_fraction) {
    hsu::ModelConfig model_cfg;
    hsu::TrainConfig train_cfg;
    ManifestWriter manifest;
    manifest.command = "train";
    if (!model_cfg_path.empty()) {
        std::string blob = read_file(model_cfg_path);
        manifest.config_blobs.push_back(blob);
        model_cfg = hsu::model_config_from_json(blob);
        manifest.inputs.push_back(model_cfg_path);
    }
    if (!train_cfg_path.empty()) {
        std::string blob = read_file(train_cfg_path);
        manifest.config_blobs.push_back(blob);
        train_cfg = hsu::train_config_from_json(blob);
        manifest.inputs.push_back(train_cfg_path);
    }
    if (epochs_override > 0)
        train_cfg.epochs = epochs_override;
    if (lr_override > 0)
        train_cfg.base_lr = lr_override;
    if (seed_given)
        train_cfg.seed = seed;
    manifest.seed = train_cfg.seed;
    manifest.inputs.push_back(data_dir);

    std::vector<hsu::SceneRecord> train_scenes, test_scenes;
    if (!test_dir.empty()) {
        train_scenes = load_scene_dir(data_dir);
        test_scenes = load_scene_dir(test_dir);
        manifest.inputs.push_back(test_dir);
    } else {
        auto scenes = load_scene_dir(data_dir);
        std::tie(train_scenes, test_scenes) =
            hsu::split_dataset(scenes, split_fraction, train_cfg.seed);
    }

    auto result = hsu::fit(train_scenes, test_scenes, model_cfg, train_cfg);

    fs::create_directories(out_dir);
    std::string prefix = (fs::path(out_dir) / "model").string();
    hsu::save_bundle(result.bundle, prefix);
    write_file((fs::path(out_dir) / "history.json").string(),
               hsu::history_to_json(result.history) + "\n");
    auto metrics = hsu::evaluate_bundle(result.bundle, test_scenes.empty()
                                                           ? train_scenes
                                                           : test_scenes);
    write_file((fs::path(out_dir) / "metrics.json").string(),
               hsu::metrics_report_to_json(metrics,
                                           result.bundle.room_classes.names(),
                                           result.bundle.region_classes.names()) +
                   "\n");
    manifest.outputs = {prefix + ".ckpt", prefix + ".json",
                        (fs::path(out_dir) / "history.json").string(),
                        (fs::path(out_dir) / "metrics.json").string()};
    manifest.config_blobs.push_back(hsu::model_config_to_json(result.bundle.cfg));
    manifest.config_blobs.push_back(hsu::train_config_to_json(train_cfg));
    manifest.write((fs::path(out_dir) / "manifest.json").string());

    const auto& last = result.history.epochs.back();
    std::cout << "trained " << result.history.epochs.size() << " epochs; test room acc "
              << last.test_room_acc << ", test region acc " << last.test_region_acc
              << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data_dir,
             const std::string& out_path) {
    auto bundle = hsu::load_bundle(checkpoint);
    auto scenes = load_scene_dir(data_dir);
    auto metrics = hsu::evaluate_bundle(bundle, scenes);
    std::string text = hsu::metrics_report_to_json(metrics, bundle.room_classes.names(),
                                                   bundle.region_classes.names());
    if (!out_path.empty()) {
        write_file(out_path, text + "\n");
        ManifestWriter manifest;
        manifest.command = "eval";
        manifest.inputs = {checkpoint, data_dir};
        manifest.outputs = {out_path};
        manifest.write(out_path + ".manifest.json");
    }
    std::cout << text << "\n";
    return 0;
}

int cmd_infer(const std::string& checkpoint, const std::string& scene_path,
              const std::string& out_path) {
    auto bundle = hsu::load_bundle(checkpoint);
    auto scene = with_known_room_type(
        bundle, hsu::filter_structural(hsu::load_scene(scene_path)));
    auto tok = hsu::tokenize_scene(scene, bundle.vocab, bundle.room_classes,
                                   bundle.region_classes,
                                   static_cast<int>(scene.objects.size()));
    auto pred = bundle.model->forward(tok);
    std::string text = prediction_to_json(bundle, scene, pred).dump(2);
    if (!out_path.empty())
        write_file(out_path, text + "\n");
    std::cout << text << "\n";
    return 0;
}

int cmd_build_graph(const std::string& checkpoint, const std::string& scene_path,
                    const std::string& out_path) {
    auto bundle = hsu::load_bundle(checkpoint);
    auto scene = with_known_room_type(
        bundle, hsu::filter_structural(hsu::load_scene(scene_path)));
    if (scene.objects.empty())
        throw hsu::DomainError("scene has no objects after structural filtering");
    std::string room_type;
    auto affordances = predict_region_affordances(bundle, scene, &room_type);
    auto graph = hsu::assemble_graph(scene, room_type, affordances);
    auto report = hsu::validate_graph(graph);
    if (!report.valid())
        throw hsu::DomainError("assembled graph failed validation");
    hsu::save_graph(graph, out_path);

    ManifestWriter manifest;
    manifest.command = "build-graph";
    manifest.inputs = {checkpoint, scene_path};
    manifest.outputs = {out_path};
    manifest.write(out_path + ".manifest.json");
    std::cout << "wrote graph with " << graph.regions.size() << " regions to "
              << out_path << "\n";
    return 0;
}

int cmd_export_prompt(const std::string& scene_path, const std::string& graph_path,
                      const std::string& checkpoint, const std::string& rooms_path,
                      const std::string& affordances_path, bool no_round,
                      const std::string& out_path) {
    std::vector<std::string> room_types, affordances;
    if (!checkpoint.empty()) {
        auto bundle = hsu::load_bundle(checkpoint);
        room_types = bundle.room_classes.names();
        affordances = bundle.region_classes.names();
    }
    if (!rooms_path.empty())
        room_types = ordered_json::parse(read_file(rooms_path))
                         .get<std::vector<std::string>>();
    if (!affordances_path.empty())
        affordances = ordered_json::parse(read_file(affordances_path))
                          .get<std::vector<std::string>>();

    hsu::PromptOptions opts;
    opts.round_coordinates = !no_round;
    std::string text;
    if (!graph_path.empty()) {
        auto graph = hsu::load_graph(graph_path);
        if (room_types.empty())
            for (const auto& room : graph.rooms)
                room_types.push_back(room.room_type);
        if (affordances.empty())
            for (const auto& region : graph.regions)
                affordances.push_back(region.region_affordance);
        text = hsu::export_graph_prompt(graph, room_types, affordances, opts);
    } else {
        auto scene = hsu::load_scene(scene_path);
        if (room_types.empty())
            room_types.push_back(scene.room_type);
        if (affordances.empty()) {
            for (const auto& obj : scene.objects)
                if (std::find(affordances.begin(), affordances.end(),
                              obj.region_affordance) == affordances.end())
                    affordances.push_back(obj.region_affordance);
        }
        text = hsu::export_scene_prompt(scene, room_types, affordances, opts);
    }
    if (!out_path.empty())
        write_file(out_path, text);
    else
        std::cout << text;
    return 0;
}

int cmd_validate(const std::string& graph_path) {
    auto graph = hsu::load_graph(graph_path); // ParseError -> exit 2
    auto report = hsu::validate_graph(graph);
    if (report.valid()) {
        std::cout << "valid\n";
        return 0;
    }
    for (const auto& v : report.violations)
        std::cout << hsu::violation_kind_name(v.kind) << " layer=" << v.node.layer
                  << " id=" << v.node.id << ": " << v.detail << "\n";
    return 1;
}

int cmd_baseline(const std::string& kind, const std::string& data_dir,
                 const std::string& out_path, double alpha, double split_fraction,
                 std::uint64_t seed, int epochs, double lr) {
    auto scenes = load_scene_dir(data_dir);
    auto [train_scenes, test_scenes] = hsu::split_dataset(scenes, split_fraction, seed);

    std::string text;
    if (kind == "tfidf" || kind == "neighbor-vote") {
        auto model = hsu::TfidfModel::fit(train_scenes);
        model.set_uniform_fallback(true); // test split may hold unseen labels
        auto region_classes = hsu::build_region_classes(scenes);
        hsu::ConfusionMatrix cm(region_classes.size());
        for (const auto& scene : test_scenes) {
            std::vector<std::string> pred =
                kind == "tfidf"
                    ? hsu::predict_tfidf(model, scene)
                    : hsu::predict_neighbor_vote(model, scene, {alpha});
            for (size_t i = 0; i < scene.objects.size(); ++i)
                cm.accumulate(region_classes.index_of(scene.objects[i].region_affordance),
                              region_classes.index_of(pred[i]));
        }
        auto metrics = hsu::summarize(cm);
        ordered_json j;
        j["task"] = "region_classification";
        j["method"] = kind;
        if (kind == "neighbor-vote")
            j["alpha"] = alpha;
        j["accuracy"] = metrics.accuracy;
        j["miou"] = metrics.miou;
        text = j.dump(2);
    } else if (kind == "mlp") {
        auto vocab = hsu::build_vocab(scenes);
        auto room_classes = hsu::build_room_classes(scenes);
        auto region_classes = hsu::build_region_classes(scenes);
        hsu::ModelConfig cfg;
        cfg.embed_dim = 128;
        cfg.n_layers = 2;
        cfg.n_heads = 2;
        cfg.vocab_size = vocab.size();
        cfg.n_room_classes = room_classes.size();
        cfg.n_region_classes = region_classes.size();
        cfg.max_objects = 1;
        for (const auto& s : scenes)
            cfg.max_objects = std::max(cfg.max_objects, static_cast<int>(s.objects.size()));
        hsu::TrainConfig tc;
        tc.seed = seed;
        tc.epochs = epochs > 0 ? epochs : 100;
        if (lr > 0)
            tc.base_lr = lr;
        hsu::MlpBaseline model(cfg, seed);
        auto train_tokens = hsu::tokenize_all(train_scenes, vocab, room_classes, region_classes);
        auto test_tokens = hsu::tokenize_all(test_scenes, vocab, room_classes, region_classes);
        hsu::train_loop(
            model.params(),
            [&model](const hsu::TokenizedScene& tok, bool training, hsu::Rng* rng) {
                return model.forward(tok, training, rng);
            },
            train_tokens, test_tokens, tc);
        auto metrics = hsu::evaluate(
            [&model](const hsu::TokenizedScene& tok) { return model.forward(tok); },
            test_tokens, room_classes.size(), region_classes.size());
        text = hsu::metrics_report_to_json(metrics, room_classes.names(),
                                           region_classes.names());
    } else {
        throw hsu::DomainError("unknown baseline kind: " + kind);
    }

    if (!out_path.empty()) {
        write_file(out_path, text + "\n");
        ManifestWriter manifest;
        manifest.command = "baseline " + kind;
        manifest.seed = seed;
        manifest.inputs = {data_dir};
        manifest.outputs = {out_path};
        manifest.write(out_path + ".manifest.json");
    }
    std::cout << text << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical scene understanding toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate synthetic scene files");
    std::string synth_config, synth_preset = "default", synth_out;
    int synth_n = 10;
    std::uint64_t seed = 0;
    synth->add_option("--config", synth_config, "Synth config JSON file");
    synth->add_option("--preset", synth_preset, "Builtin config: default|ambiguous");
    synth->add_option("-n,--count", synth_n, "Number of scenes")->required();
    synth->add_option("--out", synth_out, "Output directory")->required();
    auto* synth_seed = synth->add_option("--seed", seed, "Generation seed");

    // train
    auto* train = app.add_subcommand("train", "Train the transformer model");
    std::string train_data, train_test_data, train_out, model_cfg_path, train_cfg_path;
    int epochs = 0;
    double lr = 0.0, split_fraction = 0.8;
    train->add_option("--data", train_data, "Scene directory")->required();
    train->add_option("--test-data", train_test_data, "Separate test scene directory");
    train->add_option("--out", train_out, "Output directory")->required();
    train->add_option("--model-config", model_cfg_path, "Model config JSON");
    train->add_option("--train-config", train_cfg_path, "Train config JSON");
    train->add_option("--epochs", epochs, "Override epoch count");
    train->add_option("--lr", lr, "Override base learning rate");
    train->add_option("--split", split_fraction, "Train fraction when splitting");
    auto* train_seed = train->add_option("--seed", seed, "Training seed");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    std::string checkpoint, eval_data, out_path;
    eval->add_option("--checkpoint", checkpoint, "Bundle prefix (no extension)")->required();
    eval->add_option("--data", eval_data, "Scene directory")->required();
    eval->add_option("--out", out_path, "Metrics output file");

    // infer
    auto* infer = app.add_subcommand("infer", "Predict room type and region affordances");
    std::string scene_path;
    infer->add_option("--checkpoint", checkpoint, "Bundle prefix")->required();
    infer->add_option("--scene", scene_path, "Scene JSON file")->required();
    infer->add_option("--out", out_path, "Prediction output file");

    // build-graph
    auto* build = app.add_subcommand("build-graph", "Construct a scene graph from predictions");
    build->add_option("--checkpoint", checkpoint, "Bundle prefix")->required();
    build->add_option("--scene", scene_path, "Scene JSON file")->required();
    build->add_option("--out", out_path, "Graph output file")->required();

    // export-prompt
    auto* prompt = app.add_subcommand("export-prompt", "Emit an LLM prompt for a scene or graph");
    std::string graph_path, rooms_path, affordances_path;
    bool no_round = false;
    prompt->add_option("--scene", scene_path, "Scene JSON file");
    prompt->add_option("--graph", graph_path, "Graph JSON file");
    prompt->add_option("--checkpoint", checkpoint, "Bundle prefix for class lists");
    prompt->add_option("--rooms", rooms_path, "JSON list of room types");
    prompt->add_option("--affordances", affordances_path, "JSON list of region affordances");
    prompt->add_flag("--no-round", no_round, "Emit full-precision coordinates");
    prompt->add_option("--out", out_path, "Prompt output file");

    // validate
    auto* validate = app.add_subcommand("validate", "Check graph invariants");
    validate->add_option("--graph", graph_path, "Graph JSON file")->required();

    // baseline
    auto* baseline = app.add_subcommand("baseline", "Run a baseline and report metrics");
    std::string baseline_kind, baseline_data;
    double alpha = 0.8;
    baseline->add_option("--kind", baseline_kind, "tfidf|neighbor-vote|mlp")->required();
    baseline->add_option("--data", baseline_data, "Scene directory")->required();
    baseline->add_option("--out", out_path, "Report output file");
    baseline->add_option("--alpha", alpha, "Neighbor-vote blend weight");
    baseline->add_option("--split", split_fraction, "Train fraction");
    baseline->add_option("--epochs", epochs, "MLP epochs");
    baseline->add_option("--lr", lr, "MLP learning rate");
    baseline->add_option("--seed", seed, "Split/training seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed())
            return cmd_synth(synth_config, synth_preset, synth_n, synth_out, seed,
                             synth_seed->count() > 0);
        if (train->parsed())
            return cmd_train(train_data, train_test_data, train_out, model_cfg_path,
                             train_cfg_path, epochs, lr, seed, train_seed->count() > 0,
                             split_fraction);
        if (eval->parsed())
            return cmd_eval(checkpoint, eval_data, out_path);
        if (infer->parsed())
            return cmd_infer(checkpoint, scene_path, out_path);
        if (build->parsed())
            return cmd_build_graph(checkpoint, scene_path, out_path);
        if (prompt->parsed()) {
            if (scene_path.empty() && graph_path.empty())
                throw hsu::DomainError("export-prompt needs --scene or --graph");
            return cmd_export_prompt(scene_path, graph_path, checkpoint, rooms_path,
                                     affordances_path, no_round, out_path);
        }
        if (validate->parsed())
            return cmd_validate(graph_path);
        if (baseline->parsed())
            return cmd_baseline(baseline_kind, baseline_data, out_path, alpha,
                                split_fraction, seed, epochs, lr);
    } catch (const hsu::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
