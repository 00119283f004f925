#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hsu/scene.hpp"

namespace hsu {

// Configuration for desk-scale synthetic scenes. Scenes are rooms with a few
// Gaussian object clusters, one cluster per region affordance, with labels
// drawn from a per-room catalog.
struct SynthConfig {
    // room type -> region affordance -> candidate labels. Duplicate labels in
    // a list act as sampling weights.
    std::map<std::string, std::map<std::string, std::vector<std::string>>> label_catalog;

    int min_objects_per_region = 5;
    int max_objects_per_region = 12;
    int min_regions = 1;
    int max_regions = 4;
    double region_spread = 0.4;   // stddev of object placement around a cluster, meters
    double room_extent = 6.0;     // side length of the room footprint, meters
    double object_box_size = 0.3; // side of the point box sampled per object
    std::uint64_t seed = 0;

    // Optional per-affordance overrides used by the ambiguity configuration.
    std::map<std::string, std::pair<int, int>> objects_per_region_override;
    // Preferred distance of the affordance's cluster center from the room
    // origin; affordances without an entry get a uniform position.
    std::map<std::string, double> affordance_radius;

    void validate() const; // throws DomainError on an unusable catalog
};

// 6 room types / 10 region affordances / 40 disjoint labels. Every label
// occurs under exactly one affordance and one room type, so a lookup table
// classifies generated scenes perfectly.
SynthConfig make_default_config(std::uint64_t seed = 0);

// One room type with two regions sharing the label "shared bin". The near
// cluster hugs the room centroid and carries most objects; the far cluster
// sits at radius 4 m, so the distance feature decides the shared label's
// region while the label alone cannot.
SynthConfig make_ambiguous_config(std::uint64_t seed = 0);

SceneRecord generate_scene(const SynthConfig& config, std::uint64_t index);
std::vector<SceneRecord> generate_corpus(const SynthConfig& config, int n_scenes);

std::string synth_config_to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const std::string& text);
SynthConfig load_synth_config(const std::string& path);

} // namespace hsu
