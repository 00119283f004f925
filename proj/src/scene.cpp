#include "hsu/scene.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hsu/rng.hpp"

namespace hsu {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json vec3_to_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const ordered_json& j) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError("expected [x, y, z] array");
    Vec3 v{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    if (!v.finite())
        throw ParseError("non-finite coordinate");
    return v;
}

} // namespace

Vec3 SceneObject::position() const {
    if (centroid)
        return *centroid;
    if (points.empty())
        throw DomainError("object " + std::to_string(object_id) +
                          " has neither points nor centroid");
    return object_centroid(points);
}

Aabb SceneObject::box() const {
    if (aabb)
        return *aabb;
    if (!points.empty())
        return bounding_box(points);
    // Degenerate box at the stored centroid.
    Vec3 c = position();
    return {c, c};
}

LabelVocab::LabelVocab(std::vector<std::string> sorted_labels_with_pad)
    : labels_(std::move(sorted_labels_with_pad)) {}

int LabelVocab::index_of(const std::string& label) const {
    auto idx = try_index_of(label);
    if (!idx)
        throw DomainError("unknown label '" + label + "'");
    return *idx;
}

std::optional<int> LabelVocab::try_index_of(const std::string& label) const {
    // Labels before PAD are sorted; PAD sits at the end.
    auto sorted_end = labels_.begin() + pad_index();
    auto it = std::lower_bound(labels_.begin(), sorted_end, label);
    if (it != sorted_end && *it == label)
        return static_cast<int>(it - labels_.begin());
    if (label == kPadLabel)
        return pad_index();
    return std::nullopt;
}

const std::string& LabelVocab::label_of(int index) const {
    if (index < 0 || index >= size())
        throw DomainError("label index out of range: " + std::to_string(index));
    return labels_[static_cast<size_t>(index)];
}

ClassVocab::ClassVocab(std::vector<std::string> sorted_names)
    : names_(std::move(sorted_names)) {}

int ClassVocab::index_of(const std::string& name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name)
        throw DomainError("unknown class '" + name + "'");
    return static_cast<int>(it - names_.begin());
}

const std::string& ClassVocab::name_of(int index) const {
    if (index < 0 || index >= size())
        throw DomainError("class index out of range: " + std::to_string(index));
    return names_[static_cast<size_t>(index)];
}

SceneRecord parse_scene_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scene JSON: ") + e.what());
    }
    SceneRecord scene;
    try {
        scene.scan_id = j.at("scan_id").get<std::string>();
        scene.room_type = j.at("room_type").get<std::string>();
        for (const auto& node : j.at("objects")) {
            SceneObject obj;
            obj.object_id = node.at("id").get<int>();
            obj.semantic_label = node.at("label").get<std::string>();
            if (obj.semantic_label.empty())
                throw ParseError("object " + std::to_string(obj.object_id) +
                                 " has an empty label");
            if (node.contains("attributes"))
                obj.attributes = node["attributes"].get<std::vector<std::string>>();
            if (node.contains("segment_ids"))
                obj.segment_ids = node["segment_ids"].get<std::vector<int>>();
            if (node.contains("points")) {
                for (const auto& p : node["points"])
                    obj.points.push_back(vec3_from_json(p));
            }
            if (node.contains("centroid"))
                obj.centroid = vec3_from_json(node["centroid"]);
            if (node.contains("aabb")) {
                Aabb box{vec3_from_json(node["aabb"].at("min")),
                         vec3_from_json(node["aabb"].at("max"))};
                if (!box.valid())
                    throw ParseError("object " + std::to_string(obj.object_id) +
                                     " has an inverted aabb");
                obj.aabb = box;
            }
            obj.region_affordance = node.at("region_affordance").get<std::string>();
            obj.object_affordance = node.at("object_affordance").get<std::string>();
            if (node.contains("common_rooms"))
                obj.common_rooms = node["common_rooms"].get<std::vector<std::string>>();
            if (obj.points.empty() && !obj.centroid)
                throw DomainError("object " + std::to_string(obj.object_id) +
                                  " has neither points nor centroid");
            // Cache derived geometry so downstream code never recomputes.
            obj.centroid = obj.position();
            obj.aabb = obj.box();
            scene.objects.push_back(std::move(obj));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scene JSON: ") + e.what());
    }
    return scene;
}

SceneRecord load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open scene file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scene_json(buf.str());
}

std::string scene_to_json(const SceneRecord& scene) {
    ordered_json j;
    j["scan_id"] = scene.scan_id;
    j["room_type"] = scene.room_type;
    j["objects"] = ordered_json::array();
    for (const auto& obj : scene.objects) {
        ordered_json node;
        node["id"] = obj.object_id;
        node["label"] = obj.semantic_label;
        if (!obj.attributes.empty())
            node["attributes"] = obj.attributes;
        if (!obj.segment_ids.empty())
            node["segment_ids"] = obj.segment_ids;
        if (!obj.points.empty()) {
            node["points"] = ordered_json::array();
            for (const auto& p : obj.points)
                node["points"].push_back(vec3_to_json(p));
        }
        if (obj.centroid)
            node["centroid"] = vec3_to_json(*obj.centroid);
        if (obj.aabb) {
            node["aabb"]["min"] = vec3_to_json(obj.aabb->min);
            node["aabb"]["max"] = vec3_to_json(obj.aabb->max);
        }
        node["region_affordance"] = obj.region_affordance;
        node["object_affordance"] = obj.object_affordance;
        node["common_rooms"] = obj.common_rooms;
        j["objects"].push_back(std::move(node));
    }
    return j.dump(2);
}

void save_scene(const SceneRecord& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write scene file: " + path);
    out << scene_to_json(scene) << "\n";
}

SceneRecord filter_structural(const SceneRecord& scene,
                              const std::set<std::string>& excluded_labels) {
    SceneRecord out;
    out.scan_id = scene.scan_id;
    out.room_type = scene.room_type;
    for (const auto& obj : scene.objects) {
        if (!excluded_labels.count(obj.semantic_label))
            out.objects.push_back(obj);
    }
    return out;
}

LabelVocab build_vocab(const std::vector<SceneRecord>& scenes) {
    if (scenes.empty())
        throw DomainError("build_vocab: empty corpus");
    std::set<std::string> labels;
    for (const auto& scene : scenes)
        for (const auto& obj : scene.objects)
            labels.insert(obj.semantic_label);
    std::vector<std::string> sorted(labels.begin(), labels.end());
    sorted.push_back(LabelVocab::kPadLabel);
    return LabelVocab(std::move(sorted));
}

ClassVocab build_room_classes(const std::vector<SceneRecord>& scenes) {
    std::set<std::string> names;
    for (const auto& scene : scenes)
        names.insert(scene.room_type);
    return ClassVocab(std::vector<std::string>(names.begin(), names.end()));
}

ClassVocab build_region_classes(const std::vector<SceneRecord>& scenes) {
    std::set<std::string> names;
    for (const auto& scene : scenes)
        for (const auto& obj : scene.objects)
            names.insert(obj.region_affordance);
    return ClassVocab(std::vector<std::string>(names.begin(), names.end()));
}

TokenizedScene tokenize_scene(const SceneRecord& scene, const LabelVocab& vocab,
                              const ClassVocab& room_classes,
                              const ClassVocab& region_classes, int n_max) {
    int n = static_cast<int>(scene.objects.size());
    if (n == 0)
        throw DomainError("tokenize_scene: scene has no objects");
    if (n > n_max)
        throw DomainError("tokenize_scene: " + std::to_string(n) +
                          " objects exceed capacity " + std::to_string(n_max));

    std::vector<Vec3> centroids;
    centroids.reserve(scene.objects.size());
    for (const auto& obj : scene.objects)
        centroids.push_back(obj.position());
    auto [room_c, dists] = room_centroid_and_distances(centroids);
    (void)room_c;

    TokenizedScene tok;
    tok.n_objects = n;
    tok.token_ids.assign(static_cast<size_t>(n_max), vocab.pad_index());
    tok.distances.assign(static_cast<size_t>(n_max), 0.0);
    tok.attention_mask.assign(static_cast<size_t>(n_max), 0);
    tok.region_targets.assign(static_cast<size_t>(n_max), TokenizedScene::kIgnoreTarget);
    tok.room_target = room_classes.index_of(scene.room_type);
    for (int i = 0; i < n; ++i) {
        const auto& obj = scene.objects[static_cast<size_t>(i)];
        tok.token_ids[static_cast<size_t>(i)] = vocab.index_of(obj.semantic_label);
        tok.distances[static_cast<size_t>(i)] = dists[static_cast<size_t>(i)];
        tok.attention_mask[static_cast<size_t>(i)] = 1;
        tok.region_targets[static_cast<size_t>(i)] =
            region_classes.index_of(obj.region_affordance);
    }
    return tok;
}

std::pair<std::vector<SceneRecord>, std::vector<SceneRecord>>
split_dataset(const std::vector<SceneRecord>& scenes, double train_fraction,
              std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw DomainError("split_dataset: train_fraction must be in (0, 1)");
    std::vector<size_t> order(scenes.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    size_t n_train = static_cast<size_t>(
        std::floor(train_fraction * static_cast<double>(scenes.size())));
    std::pair<std::vector<SceneRecord>, std::vector<SceneRecord>> out;
    for (size_t i = 0; i < order.size(); ++i) {
        if (i < n_train)
            out.first.push_back(scenes[order[i]]);
        else
            out.second.push_back(scenes[order[i]]);
    }
    return out;
}

} // namespace hsu
