#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "hsu/geometry.hpp"
#include "hsu/synth.hpp"

using namespace hsu;

TEST_CASE("generation is deterministic in (config, index)") {
    SynthConfig cfg = make_default_config(123);
    SceneRecord a = generate_scene(cfg, 4);
    SceneRecord b = generate_scene(cfg, 4);
    CHECK(scene_to_json(a) == scene_to_json(b));
    SceneRecord c = generate_scene(cfg, 5);
    CHECK(scene_to_json(a) != scene_to_json(c));
}

TEST_CASE("different seeds give different corpora") {
    SceneRecord a = generate_scene(make_default_config(1), 0);
    SceneRecord b = generate_scene(make_default_config(2), 0);
    CHECK(scene_to_json(a) != scene_to_json(b));
}

TEST_CASE("scenes respect the catalog and structural bounds") {
    SynthConfig cfg = make_default_config(7);
    for (int i = 0; i < 30; ++i) {
        SceneRecord scene = generate_scene(cfg, i);
        INFO("scene " << i);
        REQUIRE(cfg.label_catalog.count(scene.room_type));
        const auto& room_catalog = cfg.label_catalog.at(scene.room_type);

        std::map<std::string, int> per_region_count;
        for (const auto& obj : scene.objects) {
            REQUIRE(room_catalog.count(obj.region_affordance));
            const auto& labels = room_catalog.at(obj.region_affordance);
            CHECK(std::find(labels.begin(), labels.end(), obj.semantic_label) !=
                  labels.end());
            CHECK(obj.object_affordance == "to use " + obj.semantic_label);
            per_region_count[obj.region_affordance] += 1;
            CHECK(obj.points.size() >= 8);
        }
        CHECK(per_region_count.size() >= static_cast<size_t>(cfg.min_regions));
        CHECK(per_region_count.size() <= static_cast<size_t>(cfg.max_regions));
        for (const auto& [aff, count] : per_region_count) {
            CHECK(count >= cfg.min_objects_per_region);
            CHECK(count <= cfg.max_objects_per_region);
        }
        CHECK(scene.scan_id == "synth-7-" + std::to_string(i));
    }
}

TEST_CASE("cluster centers are separated by at least twice the spread") {
    SynthConfig cfg = make_default_config(31);
    for (int i = 0; i < 20; ++i) {
        SceneRecord scene = generate_scene(cfg, i);
        // Recover cluster centers as the mean object centroid per affordance.
        std::map<std::string, std::vector<Vec3>> groups;
        for (const auto& obj : scene.objects)
            groups[obj.region_affordance].push_back(obj.position());
        std::vector<Vec3> centers;
        for (const auto& [aff, pts] : groups)
            centers.push_back(object_centroid(pts));
        // With spread 0.4 and enforced 2*spread center separation, empirical
        // means should stay clearly apart; allow sampling noise.
        for (size_t a = 0; a < centers.size(); ++a)
            for (size_t b = a + 1; b < centers.size(); ++b)
                CHECK((centers[a] - centers[b]).norm() > cfg.region_spread);
    }
}

TEST_CASE("ambiguous config places the two regions at different radii") {
    SynthConfig cfg = make_ambiguous_config(3);
    int center_total = 0, perimeter_total = 0;
    for (int i = 0; i < 20; ++i) {
        SceneRecord scene = generate_scene(cfg, i);
        // both regions always present
        std::set<std::string> affs;
        for (const auto& obj : scene.objects)
            affs.insert(obj.region_affordance);
        CHECK(affs.size() == 2);

        std::vector<Vec3> centroids;
        for (const auto& obj : scene.objects)
            centroids.push_back(obj.position());
        auto [room, dist] = room_centroid_and_distances(centroids);
        double center_sum = 0, perim_sum = 0;
        int nc = 0, np = 0;
        for (size_t k = 0; k < scene.objects.size(); ++k) {
            bool shared = scene.objects[k].semantic_label == "shared bin";
            if (shared)
                (scene.objects[k].region_affordance.find("center") != std::string::npos
                     ? center_total
                     : perimeter_total) += 1;
            if (scene.objects[k].region_affordance.find("center") != std::string::npos) {
                center_sum += dist[k];
                ++nc;
            } else {
                perim_sum += dist[k];
                ++np;
            }
        }
        REQUIRE(nc > 0);
        REQUIRE(np > 0);
        // the perimeter region sits far from the room centroid
        CHECK(perim_sum / np > center_sum / nc + 1.0);
    }
    // the shared label genuinely occurs in both regions across the corpus
    CHECK(center_total > 0);
    CHECK(perimeter_total > 0);
}

TEST_CASE("synth config JSON round trip") {
    SynthConfig cfg = make_ambiguous_config(9);
    SynthConfig back = synth_config_from_json(synth_config_to_json(cfg));
    CHECK(back.label_catalog == cfg.label_catalog);
    CHECK(back.min_objects_per_region == cfg.min_objects_per_region);
    CHECK(back.region_spread == doctest::Approx(cfg.region_spread));
    CHECK(back.seed == cfg.seed);
    CHECK(back.objects_per_region_override == cfg.objects_per_region_override);
    CHECK(back.affordance_radius == cfg.affordance_radius);
    // identical configs generate identical scenes
    CHECK(scene_to_json(generate_scene(back, 0)) ==
          scene_to_json(generate_scene(cfg, 0)));
}

TEST_CASE("validate rejects unusable configs") {
    SynthConfig cfg = make_default_config();
    cfg.min_objects_per_region = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);

    SynthConfig cfg2 = make_default_config();
    cfg2.label_catalog.clear();
    CHECK_THROWS_AS(cfg2.validate(), DomainError);

    SynthConfig cfg3 = make_default_config();
    cfg3.max_regions = 0;
    CHECK_THROWS_AS(cfg3.validate(), DomainError);
}

TEST_CASE("generate_corpus indexes scenes sequentially") {
    SynthConfig cfg = make_default_config(55);
    auto corpus = generate_corpus(cfg, 5);
    REQUIRE(corpus.size() == 5);
    for (int i = 0; i < 5; ++i)
        CHECK(scene_to_json(corpus[i]) == scene_to_json(generate_scene(cfg, i)));
}
