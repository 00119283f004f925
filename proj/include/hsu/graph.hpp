#pragma once

#include <string>
#include <vector>

#include "hsu/scene.hpp"

namespace hsu {

struct ObjectNode {
    int object_id = 0;
    std::string semantic_label;
    std::vector<std::string> attributes;
    std::vector<int> segment_ids;
    std::string region_affordance;
    std::string object_affordance;
    std::vector<std::string> common_rooms;
    Vec3 centroid;
    Aabb aabb;
};

struct RegionNode {
    int region_id = 0;
    std::vector<int> child_object_ids;
    std::string region_affordance;
    Vec3 centroid;
};

struct RoomNode {
    int room_id = 0;
    std::string scan_id;
    std::vector<int> child_region_ids;
    std::string room_type;
};

// Layer indices in edge endpoints: 1 = objects, 2 = regions, 3 = rooms.
struct NodeRef {
    int layer = 0;
    int id = 0;
    bool operator==(const NodeRef& o) const { return layer == o.layer && id == o.id; }
    bool operator<(const NodeRef& o) const {
        return layer != o.layer ? layer < o.layer : id < o.id;
    }
};

struct Edge {
    NodeRef a;
    NodeRef b;
    bool operator==(const Edge& o) const { return a == o.a && b == o.b; }
    bool operator<(const Edge& o) const { return a != o.a ? a < o.a : b < o.b; }
};

// Three-layer hierarchical scene graph. Immutable by convention after
// construction; all invariants are checked by validate_graph.
struct Hsg {
    std::vector<ObjectNode> objects;
    std::vector<RegionNode> regions;
    std::vector<RoomNode> rooms;
    std::vector<Edge> edges;
};

enum class ViolationKind {
    SingleParent,
    AdjacentLayersOnly,
    DisjointChildren,
    DanglingEdge,
    EmptyChildren,
    MixedAffordanceRegion,
    DuplicateNodeId,
    CentroidMismatch,
};

const char* violation_kind_name(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    NodeRef node;          // offending node or edge endpoint
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }
};

ValidationReport validate_graph(const Hsg& g);

// Mean of the children's object centroids.
Vec3 region_centroid(const std::vector<ObjectNode>& children);

// Builds a graph with one region per distinct affordance value (region ids
// in first-occurrence order) under a single room node.
Hsg assemble_graph(const SceneRecord& scene, const std::string& room_type,
                   const std::vector<std::string>& region_affordances);

std::string graph_to_json(const Hsg& g);
Hsg graph_from_json(const std::string& text);
Hsg load_graph(const std::string& path);
void save_graph(const Hsg& g, const std::string& path);

} // namespace hsu
