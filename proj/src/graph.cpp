#include "hsu/graph.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace hsu {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kCentroidTol = 1e-6;

} // namespace

const char* violation_kind_name(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::SingleParent: return "SingleParent";
    case ViolationKind::AdjacentLayersOnly: return "AdjacentLayersOnly";
    case ViolationKind::DisjointChildren: return "DisjointChildren";
    case ViolationKind::DanglingEdge: return "DanglingEdge";
    case ViolationKind::EmptyChildren: return "EmptyChildren";
    case ViolationKind::MixedAffordanceRegion: return "MixedAffordanceRegion";
    case ViolationKind::DuplicateNodeId: return "DuplicateNodeId";
    case ViolationKind::CentroidMismatch: return "CentroidMismatch";
    }
    return "Unknown";
}

ValidationReport validate_graph(const Hsg& g) {
    ValidationReport report;
    auto flag = [&](ViolationKind kind, NodeRef node, std::string detail) {
        report.violations.push_back({kind, node, std::move(detail)});
    };

    std::unordered_map<int, const ObjectNode*> objects;
    std::unordered_map<int, const RegionNode*> regions;
    std::unordered_map<int, const RoomNode*> rooms;
    for (const auto& n : g.objects) {
        if (!objects.emplace(n.object_id, &n).second)
            flag(ViolationKind::DuplicateNodeId, {1, n.object_id}, "duplicate object id");
    }
    for (const auto& n : g.regions) {
        if (!regions.emplace(n.region_id, &n).second)
            flag(ViolationKind::DuplicateNodeId, {2, n.region_id}, "duplicate region id");
    }
    for (const auto& n : g.rooms) {
        if (!rooms.emplace(n.room_id, &n).second)
            flag(ViolationKind::DuplicateNodeId, {3, n.room_id}, "duplicate room id");
    }

    auto exists = [&](NodeRef r) {
        switch (r.layer) {
        case 1: return objects.count(r.id) > 0;
        case 2: return regions.count(r.id) > 0;
        case 3: return rooms.count(r.id) > 0;
        default: return false;
        }
    };

    // Parent count per node, keyed by (layer, id) of the child.
    std::map<NodeRef, int> parent_count;
    for (const auto& e : g.edges) {
        bool ok = true;
        if (!exists(e.a)) {
            flag(ViolationKind::DanglingEdge, e.a, "edge endpoint missing");
            ok = false;
        }
        if (!exists(e.b)) {
            flag(ViolationKind::DanglingEdge, e.b, "edge endpoint missing");
            ok = false;
        }
        NodeRef lo = e.a.layer <= e.b.layer ? e.a : e.b;
        NodeRef hi = e.a.layer <= e.b.layer ? e.b : e.a;
        if (hi.layer - lo.layer != 1) {
            flag(ViolationKind::AdjacentLayersOnly, lo,
                 "edge connects layers " + std::to_string(lo.layer) + " and " +
                     std::to_string(hi.layer));
            ok = false;
        }
        if (ok)
            parent_count[lo] += 1;
    }
    for (const auto& [child, count] : parent_count) {
        if (count > 1)
            flag(ViolationKind::SingleParent, child,
                 "node has " + std::to_string(count) + " parents");
    }

    // Children listed on region/room nodes must exist, be non-empty, and be
    // disjoint across same-layer nodes.
    std::unordered_map<int, int> object_owner;
    for (const auto& region : g.regions) {
        if (region.child_object_ids.empty())
            flag(ViolationKind::EmptyChildren, {2, region.region_id},
                 "region has no child objects");
        Vec3 sum;
        int found = 0;
        for (int oid : region.child_object_ids) {
            auto it = objects.find(oid);
            if (it == objects.end()) {
                flag(ViolationKind::DanglingEdge, {1, oid},
                     "region child object does not exist");
                continue;
            }
            auto owner = object_owner.find(oid);
            if (owner != object_owner.end()) {
                flag(ViolationKind::DisjointChildren, {1, oid},
                     "object is a child of regions " + std::to_string(owner->second) +
                         " and " + std::to_string(region.region_id));
            } else {
                object_owner.emplace(oid, region.region_id);
            }
            if (it->second->region_affordance != region.region_affordance)
                flag(ViolationKind::MixedAffordanceRegion, {2, region.region_id},
                     "object " + std::to_string(oid) + " has affordance '" +
                         it->second->region_affordance + "' in region '" +
                         region.region_affordance + "'");
            sum = sum + it->second->centroid;
            ++found;
        }
        if (found > 0) {
            Vec3 mean = sum * (1.0 / found);
            if ((mean - region.centroid).norm() > kCentroidTol)
                flag(ViolationKind::CentroidMismatch, {2, region.region_id},
                     "region centroid is not the mean of child centroids");
        }
    }
    std::unordered_map<int, int> region_owner;
    for (const auto& room : g.rooms) {
        if (room.child_region_ids.empty())
            flag(ViolationKind::EmptyChildren, {3, room.room_id},
                 "room has no child regions");
        for (int rid : room.child_region_ids) {
            if (!regions.count(rid)) {
                flag(ViolationKind::DanglingEdge, {2, rid},
                     "room child region does not exist");
                continue;
            }
            auto owner = region_owner.find(rid);
            if (owner != region_owner.end())
                flag(ViolationKind::DisjointChildren, {2, rid},
                     "region is a child of two rooms");
            else
                region_owner.emplace(rid, room.room_id);
        }
    }
    return report;
}

Vec3 region_centroid(const std::vector<ObjectNode>& children) {
    if (children.empty())
        throw DomainError("region_centroid: empty region");
    Vec3 sum;
    for (const auto& c : children)
        sum = sum + c.centroid;
    return sum * (1.0 / static_cast<double>(children.size()));
}

Hsg assemble_graph(const SceneRecord& scene, const std::string& room_type,
                   const std::vector<std::string>& region_affordances) {
    if (scene.objects.empty())
        throw DomainError("assemble_graph: empty scene");
    if (region_affordances.size() != scene.objects.size())
        throw DomainError("assemble_graph: affordance count " +
                          std::to_string(region_affordances.size()) +
                          " does not match object count " +
                          std::to_string(scene.objects.size()));

    Hsg g;
    std::unordered_map<std::string, int> region_of_affordance;
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        const SceneObject& src = scene.objects[i];
        const std::string& aff = region_affordances[i];

        ObjectNode node;
        node.object_id = src.object_id;
        node.semantic_label = src.semantic_label;
        node.attributes = src.attributes;
        node.segment_ids = src.segment_ids;
        node.region_affordance = aff;
        node.object_affordance = src.object_affordance;
        node.common_rooms = src.common_rooms;
        node.centroid = src.position();
        node.aabb = src.box();
        g.objects.push_back(std::move(node));

        auto it = region_of_affordance.find(aff);
        int region_id;
        if (it == region_of_affordance.end()) {
            region_id = static_cast<int>(g.regions.size());
            region_of_affordance.emplace(aff, region_id);
            RegionNode region;
            region.region_id = region_id;
            region.region_affordance = aff;
            g.regions.push_back(std::move(region));
        } else {
            region_id = it->second;
        }
        g.regions[region_id].child_object_ids.push_back(src.object_id);
        g.edges.push_back({{1, src.object_id}, {2, region_id}});
    }

    RoomNode room;
    room.room_id = 0;
    room.scan_id = scene.scan_id;
    room.room_type = room_type;
    for (auto& region : g.regions) {
        Vec3 sum;
        for (int oid : region.child_object_ids) {
            for (const auto& obj : g.objects) {
                if (obj.object_id == oid) {
                    sum = sum + obj.centroid;
                    break;
                }
            }
        }
        region.centroid = sum * (1.0 / static_cast<double>(region.child_object_ids.size()));
        room.child_region_ids.push_back(region.region_id);
        g.edges.push_back({{2, region.region_id}, {3, 0}});
    }
    g.rooms.push_back(std::move(room));
    return g;
}

namespace {

ordered_json vec3_to_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const ordered_json& j) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError("expected [x, y, z] array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

std::string graph_to_json(const Hsg& g) {
    ordered_json j;
    j["rooms"] = ordered_json::array();
    for (const auto& r : g.rooms) {
        ordered_json node;
        node["room_id"] = r.room_id;
        node["scan_id"] = r.scan_id;
        node["child_region_ids"] = r.child_region_ids;
        node["room_type"] = r.room_type;
        j["rooms"].push_back(std::move(node));
    }
    j["regions"] = ordered_json::array();
    for (const auto& r : g.regions) {
        ordered_json node;
        node["region_id"] = r.region_id;
        node["child_object_ids"] = r.child_object_ids;
        node["region_affordance"] = r.region_affordance;
        node["centroid"] = vec3_to_json(r.centroid);
        j["regions"].push_back(std::move(node));
    }
    j["objects"] = ordered_json::array();
    for (const auto& o : g.objects) {
        ordered_json node;
        node["object_id"] = o.object_id;
        node["semantic_label"] = o.semantic_label;
        node["attributes"] = o.attributes;
        node["segment_ids"] = o.segment_ids;
        node["region_affordance"] = o.region_affordance;
        node["object_affordance"] = o.object_affordance;
        node["common_rooms"] = o.common_rooms;
        node["centroid"] = vec3_to_json(o.centroid);
        node["aabb"]["min"] = vec3_to_json(o.aabb.min);
        node["aabb"]["max"] = vec3_to_json(o.aabb.max);
        j["objects"].push_back(std::move(node));
    }
    j["edges"] = ordered_json::array();
    for (const auto& e : g.edges)
        j["edges"].push_back(ordered_json::array({e.a.layer, e.a.id, e.b.layer, e.b.id}));
    return j.dump(2);
}

Hsg graph_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph JSON: ") + e.what());
    }
    Hsg g;
    try {
        for (const auto& node : j.at("rooms")) {
            RoomNode r;
            r.room_id = node.at("room_id").get<int>();
            r.scan_id = node.at("scan_id").get<std::string>();
            r.child_region_ids = node.at("child_region_ids").get<std::vector<int>>();
            r.room_type = node.at("room_type").get<std::string>();
            g.rooms.push_back(std::move(r));
        }
        for (const auto& node : j.at("regions")) {
            RegionNode r;
            r.region_id = node.at("region_id").get<int>();
            r.child_object_ids = node.at("child_object_ids").get<std::vector<int>>();
            r.region_affordance = node.at("region_affordance").get<std::string>();
            r.centroid = vec3_from_json(node.at("centroid"));
            g.regions.push_back(std::move(r));
        }
        for (const auto& node : j.at("objects")) {
            ObjectNode o;
            o.object_id = node.at("object_id").get<int>();
            o.semantic_label = node.at("semantic_label").get<std::string>();
            o.attributes = node.at("attributes").get<std::vector<std::string>>();
            o.segment_ids = node.at("segment_ids").get<std::vector<int>>();
            o.region_affordance = node.at("region_affordance").get<std::string>();
            o.object_affordance = node.at("object_affordance").get<std::string>();
            o.common_rooms = node.at("common_rooms").get<std::vector<std::string>>();
            o.centroid = vec3_from_json(node.at("centroid"));
            o.aabb.min = vec3_from_json(node.at("aabb").at("min"));
            o.aabb.max = vec3_from_json(node.at("aabb").at("max"));
            g.objects.push_back(std::move(o));
        }
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 4)
                throw ParseError("edge must be [layer, id, layer, id]");
            g.edges.push_back({{e[0].get<int>(), e[1].get<int>()},
                               {e[2].get<int>(), e[3].get<int>()}});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph JSON: ") + e.what());
    }
    return g;
}

Hsg load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open graph file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return graph_from_json(buf.str());
}

void save_graph(const Hsg& g, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write graph file: " + path);
    out << graph_to_json(g) << "\n";
}

} // namespace hsu
