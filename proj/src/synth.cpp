#include "hsu/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hsu/rng.hpp"

namespace hsu {

namespace {

using ordered_json = nlohmann::ordered_json;

} // namespace

void SynthConfig::validate() const {
    if (label_catalog.empty())
        throw DomainError("synth config: empty label catalog");
    for (const auto& [room, affordances] : label_catalog) {
        if (affordances.empty())
            throw DomainError("synth config: room '" + room + "' has no affordances");
        for (const auto& [aff, labels] : affordances) {
            if (labels.empty())
                throw DomainError("synth config: affordance '" + aff + "' has no labels");
        }
    }
    if (min_objects_per_region < 1 || max_objects_per_region < min_objects_per_region)
        throw DomainError("synth config: invalid objects-per-region range");
    if (min_regions < 1 || max_regions < min_regions)
        throw DomainError("synth config: invalid regions-per-scene range");
    if (region_spread <= 0.0 || room_extent <= 0.0 || object_box_size <= 0.0)
        throw DomainError("synth config: spreads must be positive");
}

SynthConfig make_default_config(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.label_catalog = {
        {"bedroom",
         {{"for sleeping", {"bed", "pillow", "blanket", "nightstand"}},
          {"to store clothing", {"wardrobe", "dresser", "hanger", "laundry basket"}}}},
        {"kitchen",
         {{"kitchenette", {"stove", "oven", "kettle", "pan"}},
          {"for dining", {"dining table", "dining chair", "plate", "cup"}}}},
        {"livingroom",
         {{"to rest", {"sofa", "armchair", "coffee table", "cushion"}},
          {"for entertainment", {"tv", "tv stand", "speaker", "game console"}}}},
        {"bathroom",
         {{"for washing", {"sink", "washbasin", "towel", "soap dispenser"}},
          {"for toileting", {"toilet", "toilet paper", "bidet", "cleaning brush"}}}},
        {"office",
         {{"to work/study", {"desk", "office chair", "monitor", "bookshelf"}},
          {"for lighting", {"lamp", "table lamp", "floor lamp", "light"}}}},
        {"storage",
         {{"to store", {"shelf", "box", "crate", "suitcase"}},
          {"for shelf storage", {"rack", "basket", "container", "bin"}}}},
    };
    return cfg;
}

SynthConfig make_ambiguous_config(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.region_spread = 0.3;
    cfg.min_regions = 2;
    cfg.max_regions = 2;
    // "shared bin" appears twice per list to dominate the label marginals.
    cfg.label_catalog = {
        {"studio",
         {{"center zone", {"workbench", "shared bin", "shared bin"}},
          {"perimeter zone", {"wall rack", "shared bin", "shared bin"}}}},
    };
    cfg.objects_per_region_override["center zone"] = {6, 9};
    cfg.objects_per_region_override["perimeter zone"] = {2, 3};
    cfg.affordance_radius["center zone"] = 0.0;
    cfg.affordance_radius["perimeter zone"] = 4.0;
    return cfg;
}

namespace {

Vec3 sample_cluster_center(const SynthConfig& cfg, const std::string& affordance,
                           Rng& rng) {
    auto it = cfg.affordance_radius.find(affordance);
    if (it != cfg.affordance_radius.end()) {
        double angle = rng.uniform(0.0, 2.0 * M_PI);
        return {it->second * std::cos(angle), it->second * std::sin(angle),
                rng.uniform(0.0, 0.5)};
    }
    double half = cfg.room_extent / 2.0;
    return {rng.uniform(-half, half), rng.uniform(-half, half), rng.uniform(0.0, 1.0)};
}

} // namespace

SceneRecord generate_scene(const SynthConfig& cfg, std::uint64_t index) {
    cfg.validate();
    Rng rng = Rng::for_index(cfg.seed, index);

    std::vector<std::string> room_types;
    for (const auto& [room, _] : cfg.label_catalog)
        room_types.push_back(room);
    const std::string& room_type =
        room_types[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(room_types.size()) - 1))];
    const auto& room_catalog = cfg.label_catalog.at(room_type);

    std::vector<std::string> affordances;
    for (const auto& [aff, _] : room_catalog)
        affordances.push_back(aff);
    rng.shuffle(affordances);
    int n_regions = rng.uniform_int(
        std::min(cfg.min_regions, static_cast<int>(affordances.size())),
        std::min(cfg.max_regions, static_cast<int>(affordances.size())));
    affordances.resize(static_cast<size_t>(n_regions));
    // Deterministic region order for fixed (seed, index), but sorted so the
    // emitted object order does not leak shuffle internals.
    std::sort(affordances.begin(), affordances.end());

    // Cluster centers kept at least 2 * region_spread apart.
    std::vector<Vec3> centers;
    for (const auto& aff : affordances) {
        Vec3 c;
        for (int attempt = 0; attempt < 200; ++attempt) {
            c = sample_cluster_center(cfg, aff, rng);
            bool ok = true;
            for (const auto& prev : centers)
                if ((c - prev).norm() < 2.0 * cfg.region_spread)
                    ok = false;
            if (ok)
                break;
        }
        centers.push_back(c);
    }

    SceneRecord scene;
    scene.scan_id = "synth-" + std::to_string(cfg.seed) + "-" + std::to_string(index);
    scene.room_type = room_type;

    int next_id = 1;
    for (size_t r = 0; r < affordances.size(); ++r) {
        const std::string& aff = affordances[r];
        const auto& labels = room_catalog.at(aff);
        int lo = cfg.min_objects_per_region;
        int hi = cfg.max_objects_per_region;
        if (auto it = cfg.objects_per_region_override.find(aff);
            it != cfg.objects_per_region_override.end()) {
            lo = it->second.first;
            hi = it->second.second;
        }
        int n_objects = rng.uniform_int(lo, hi);
        for (int i = 0; i < n_objects; ++i) {
            SceneObject obj;
            obj.object_id = next_id++;
            obj.semantic_label =
                labels[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(labels.size()) - 1))];
            obj.region_affordance = aff;
            obj.object_affordance = "to use " + obj.semantic_label;
            for (const auto& [room, room_affs] : cfg.label_catalog) {
                for (const auto& [a, ls] : room_affs) {
                    if (std::find(ls.begin(), ls.end(), obj.semantic_label) != ls.end()) {
                        if (std::find(obj.common_rooms.begin(), obj.common_rooms.end(),
                                      room) == obj.common_rooms.end())
                            obj.common_rooms.push_back(room);
                    }
                }
            }
            Vec3 pos = centers[r] + Vec3{rng.normal(0.0, cfg.region_spread),
                                         rng.normal(0.0, cfg.region_spread),
                                         rng.normal(0.0, cfg.region_spread * 0.25)};
            double h = cfg.object_box_size / 2.0;
            for (double dx : {-h, h})
                for (double dy : {-h, h})
                    for (double dz : {-h, h})
                        obj.points.push_back(pos + Vec3{dx, dy, dz});
            obj.points.push_back(pos);
            obj.centroid = object_centroid(obj.points);
            obj.aabb = bounding_box(obj.points);
            scene.objects.push_back(std::move(obj));
        }
    }
    return scene;
}

std::vector<SceneRecord> generate_corpus(const SynthConfig& cfg, int n_scenes) {
    if (n_scenes < 1)
        throw DomainError("generate_corpus: n_scenes must be >= 1");
    std::vector<SceneRecord> scenes;
    scenes.reserve(static_cast<size_t>(n_scenes));
    for (int i = 0; i < n_scenes; ++i)
        scenes.push_back(generate_scene(cfg, static_cast<std::uint64_t>(i)));
    return scenes;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
    ordered_json j;
    j["label_catalog"] = cfg.label_catalog;
    j["objects_per_region"] = {cfg.min_objects_per_region, cfg.max_objects_per_region};
    j["regions_per_scene"] = {cfg.min_regions, cfg.max_regions};
    j["region_spread"] = cfg.region_spread;
    j["room_extent"] = cfg.room_extent;
    j["object_box_size"] = cfg.object_box_size;
    j["seed"] = cfg.seed;
    if (!cfg.objects_per_region_override.empty()) {
        ordered_json o;
        for (const auto& [aff, range] : cfg.objects_per_region_override)
            o[aff] = {range.first, range.second};
        j["objects_per_region_override"] = std::move(o);
    }
    if (!cfg.affordance_radius.empty())
        j["affordance_radius"] = cfg.affordance_radius;
    return j.dump(2);
}

SynthConfig synth_config_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synth config JSON: ") + e.what());
    }
    SynthConfig cfg;
    try {
        cfg.label_catalog =
            j.at("label_catalog")
                .get<std::map<std::string, std::map<std::string, std::vector<std::string>>>>();
        if (j.contains("objects_per_region")) {
            cfg.min_objects_per_region = j["objects_per_region"][0].get<int>();
            cfg.max_objects_per_region = j["objects_per_region"][1].get<int>();
        }
        if (j.contains("regions_per_scene")) {
            cfg.min_regions = j["regions_per_scene"][0].get<int>();
            cfg.max_regions = j["regions_per_scene"][1].get<int>();
        }
        if (j.contains("region_spread"))
            cfg.region_spread = j["region_spread"].get<double>();
        if (j.contains("room_extent"))
            cfg.room_extent = j["room_extent"].get<double>();
        if (j.contains("object_box_size"))
            cfg.object_box_size = j["object_box_size"].get<double>();
        if (j.contains("seed"))
            cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("objects_per_region_override")) {
            for (const auto& [aff, range] : j["objects_per_region_override"].items())
                cfg.objects_per_region_override[aff] = {range[0].get<int>(),
                                                        range[1].get<int>()};
        }
        if (j.contains("affordance_radius"))
            cfg.affordance_radius =
                j["affordance_radius"].get<std::map<std::string, double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synth config JSON: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

SynthConfig load_synth_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open synth config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return synth_config_from_json(buf.str());
}

} // namespace hsu
