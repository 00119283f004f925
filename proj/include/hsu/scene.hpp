#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hsu/geometry.hpp"

namespace hsu {

struct SceneObject {
    int object_id = 0;
    std::string semantic_label;
    std::vector<std::string> attributes;
    std::vector<int> segment_ids;
    std::vector<Vec3> points;            // may be empty when centroid given
    std::optional<Vec3> centroid;
    std::optional<Aabb> aabb;
    std::string region_affordance;
    std::string object_affordance;
    std::vector<std::string> common_rooms;

    // Centroid, computing it from points when not stored.
    Vec3 position() const;
    Aabb box() const;
};

struct SceneRecord {
    std::string scan_id;
    std::string room_type;
    std::vector<SceneObject> objects;
};

// Bijective label <-> contiguous index map. Labels sorted lexicographically,
// with a reserved PAD entry at the last index.
class LabelVocab {
public:
    static constexpr const char* kPadLabel = "<PAD>";

    LabelVocab() = default;
    explicit LabelVocab(std::vector<std::string> sorted_labels_with_pad);

    int index_of(const std::string& label) const;        // throws DomainError
    std::optional<int> try_index_of(const std::string& label) const;
    const std::string& label_of(int index) const;
    int size() const { return static_cast<int>(labels_.size()); }
    int pad_index() const { return size() - 1; }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<std::string> labels_;
};

// Class-name <-> index map for classification targets (no PAD entry).
class ClassVocab {
public:
    ClassVocab() = default;
    explicit ClassVocab(std::vector<std::string> sorted_names);

    int index_of(const std::string& name) const;          // throws DomainError
    const std::string& name_of(int index) const;
    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
};

// Padded fixed-length model input for one scene.
struct TokenizedScene {
    static constexpr int kIgnoreTarget = -1;

    std::vector<int> token_ids;        // length n_max, PAD beyond n_objects
    std::vector<double> distances;     // length n_max, 0 beyond n_objects
    std::vector<char> attention_mask;  // length n_max, true for real objects
    std::vector<int> region_targets;   // length n_max, kIgnoreTarget when padded
    int room_target = 0;
    int n_objects = 0;
};

SceneRecord load_scene(const std::string& path);
SceneRecord parse_scene_json(const std::string& text);
std::string scene_to_json(const SceneRecord& scene);
void save_scene(const SceneRecord& scene, const std::string& path);

// Removes structural objects (walls, floors, ceilings by default),
// preserving the order of survivors.
SceneRecord filter_structural(
    const SceneRecord& scene,
    const std::set<std::string>& excluded_labels = {"wall", "floor", "ceiling"});

LabelVocab build_vocab(const std::vector<SceneRecord>& scenes);
ClassVocab build_room_classes(const std::vector<SceneRecord>& scenes);
ClassVocab build_region_classes(const std::vector<SceneRecord>& scenes);

TokenizedScene tokenize_scene(const SceneRecord& scene, const LabelVocab& vocab,
                              const ClassVocab& room_classes,
                              const ClassVocab& region_classes, int n_max);

// Seeded shuffle, then split at floor(train_fraction * n).
std::pair<std::vector<SceneRecord>, std::vector<SceneRecord>>
split_dataset(const std::vector<SceneRecord>& scenes, double train_fraction,
              std::uint64_t seed);

} // namespace hsu
