#include "hsu/prompt.hpp"

#include <cstdio>
#include <sstream>

namespace hsu {

namespace {

std::string format_coord(double v, const PromptOptions& opts) {
    char buf[64];
    if (opts.round_coordinates)
        std::snprintf(buf, sizeof(buf), "%.3f", v);
    else
        std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string object_line(int id, const std::string& label, const Vec3& pos,
                        const PromptOptions& opts) {
    std::ostringstream out;
    out << id << label << " [" << format_coord(pos.x, opts) << " "
        << format_coord(pos.y, opts) << " " << format_coord(pos.z, opts) << "]";
    return out.str();
}

std::string quoted_list(const std::vector<std::string>& items) {
    std::ostringstream out;
    out << "[";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i)
            out << ", ";
        out << '"' << items[i] << '"';
    }
    out << "]";
    return out.str();
}

void append_question(std::ostringstream& out,
                     const std::vector<std::string>& room_types,
                     const std::vector<std::string>& region_affordances) {
    out << "\n"
        << "Question:\n"
        << "Based on the objects in this room, what is the common type for this "
           "room from the following list: "
        << quoted_list(room_types)
        << "? Considering the region-specific affordance, what is the individual "
           "affordance for each object from the following list: "
        << quoted_list(region_affordances) << "?\n"
        << "\n"
        << "Please provide the answers in JSON format like this:\n"
        << "{\n"
        << "  \"Layer1\": \"common_type\",\n"
        << "  \"Layer2\": {\n"
        << "    \"Object ID\": \"individual_affordance\",\n"
        << "    \"Object ID\": \"individual_affordance\",\n"
        << "    ...\n"
        << "  }\n"
        << "}\n";
}

} // namespace

std::string export_scene_prompt(const SceneRecord& scene,
                                const std::vector<std::string>& room_types,
                                const std::vector<std::string>& region_affordances,
                                const PromptOptions& opts) {
    std::ostringstream out;
    out << "Here are the objects with their labels and respective positions:\n";
    for (const auto& obj : scene.objects)
        out << object_line(obj.object_id, obj.semantic_label, obj.position(), opts)
            << "\n";
    append_question(out, room_types, region_affordances);
    return out.str();
}

std::string export_graph_prompt(const Hsg& graph,
                                const std::vector<std::string>& room_types,
                                const std::vector<std::string>& region_affordances,
                                const PromptOptions& opts) {
    std::ostringstream out;
    out << "Scene graph context:\n";
    for (const auto& room : graph.rooms) {
        out << "Room " << room.room_id << " (" << room.room_type << "):\n";
        for (int rid : room.child_region_ids) {
            for (const auto& region : graph.regions) {
                if (region.region_id != rid)
                    continue;
                out << "  Region " << region.region_id << " ("
                    << region.region_affordance << "):";
                bool first = true;
                for (int oid : region.child_object_ids) {
                    for (const auto& obj : graph.objects) {
                        if (obj.object_id != oid)
                            continue;
                        out << (first ? " " : ", ") << obj.object_id
                            << obj.semantic_label;
                        first = false;
                    }
                }
                out << "\n";
            }
        }
    }
    out << "\n"
        << "Here are the objects with their labels and respective positions:\n";
    for (const auto& obj : graph.objects)
        out << object_line(obj.object_id, obj.semantic_label, obj.centroid, opts)
            << "\n";
    append_question(out, room_types, region_affordances);
    return out.str();
}

} // namespace hsu
