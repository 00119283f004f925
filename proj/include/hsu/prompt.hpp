#pragma once

#include <string>
#include <vector>

#include "hsu/graph.hpp"
#include "hsu/scene.hpp"

namespace hsu {

struct PromptOptions {
    // Coordinates are rounded to 3 decimals to keep prompts compact;
    // disable to emit full precision.
    bool round_coordinates = true;
};

// One "<id><label> [x y z]" line per object followed by the question
// template (room-type list, region-affordance list) and the JSON answer
// schema with "Layer1"/"Layer2" keys.
std::string export_scene_prompt(const SceneRecord& scene,
                                const std::vector<std::string>& room_types,
                                const std::vector<std::string>& region_affordances,
                                const PromptOptions& opts = {});

// Same template with a rooms -> regions -> objects context block prepended.
std::string export_graph_prompt(const Hsg& graph,
                                const std::vector<std::string>& room_types,
                                const std::vector<std::string>& region_affordances,
                                const PromptOptions& opts = {});

} // namespace hsu
