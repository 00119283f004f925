#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "hsu/baselines.hpp"
#include "hsu/synth.hpp"

using namespace hsu;

namespace {

SceneObject object_at(int id, const std::string& label, const std::string& affordance,
                      Vec3 pos, double box_half = 0.5) {
    SceneObject obj;
    obj.object_id = id;
    obj.semantic_label = label;
    obj.region_affordance = affordance;
    obj.object_affordance = "to use " + label;
    obj.centroid = pos;
    obj.aabb = Aabb{pos - Vec3{box_half, box_half, box_half},
                    pos + Vec3{box_half, box_half, box_half}};
    return obj;
}

// Small corpus with known counts:
//   desk:  3x "to work", 1x "to store"
//   chair: 2x "to work"
//   box:   2x "to store"
std::vector<SceneRecord> counting_corpus() {
    SceneRecord s1;
    s1.scan_id = "a";
    s1.room_type = "office";
    s1.objects = {object_at(0, "desk", "to work", {0, 0, 0}),
                  object_at(1, "desk", "to work", {1, 0, 0}),
                  object_at(2, "chair", "to work", {2, 0, 0}),
                  object_at(3, "box", "to store", {9, 0, 0})};
    SceneRecord s2;
    s2.scan_id = "b";
    s2.room_type = "storage";
    s2.objects = {object_at(0, "desk", "to work", {0, 0, 0}),
                  object_at(1, "desk", "to store", {5, 0, 0}),
                  object_at(2, "chair", "to work", {1, 0, 0}),
                  object_at(3, "box", "to store", {6, 0, 0})};
    return {s1, s2};
}

} // namespace

TEST_CASE("tfidf scores match an independently computed table") {
    auto model = TfidfModel::fit(counting_corpus());
    // affordances sorted: ["to store", "to work"]
    REQUIRE(model.affordances() == std::vector<std::string>{"to store", "to work"});

    // documents: desk {work:3, store:1}, chair {work:2}, box {store:2}
    // df(store) = 2 (desk, box); df(work) = 2 (desk, chair); N = 3
    double idf_store = std::log((1.0 + 3.0) / (1.0 + 2.0)) + 1.0;
    double idf_work = idf_store; // same df

    auto desk = model.scores("desk");
    CHECK(desk[0] == doctest::Approx(0.25 * idf_store).epsilon(1e-12));
    CHECK(desk[1] == doctest::Approx(0.75 * idf_work).epsilon(1e-12));
    auto chair = model.scores("chair");
    CHECK(chair[0] == doctest::Approx(0.0));
    CHECK(chair[1] == doctest::Approx(1.0 * idf_work).epsilon(1e-12));
    auto box = model.scores("box");
    CHECK(box[0] == doctest::Approx(1.0 * idf_store).epsilon(1e-12));

    CHECK(model.predict("desk") == "to work");
    CHECK(model.predict("box") == "to store");
}

TEST_CASE("argmax ties break toward the lowest affordance index") {
    // one label seen equally often with both affordances
    SceneRecord s;
    s.scan_id = "t";
    s.room_type = "r";
    s.objects = {object_at(0, "thing", "b-aff", {0, 0, 0}),
                 object_at(1, "thing", "a-aff", {1, 0, 0})};
    auto model = TfidfModel::fit({s});
    // equal tf and equal idf -> tie -> lowest index wins ("a-aff")
    CHECK(model.predict("thing") == "a-aff");
}

TEST_CASE("unknown labels throw unless the uniform fallback is enabled") {
    auto model = TfidfModel::fit(counting_corpus());
    CHECK_THROWS_AS(model.scores("sofa"), DomainError);
    CHECK_FALSE(model.knows("sofa"));
    model.set_uniform_fallback(true);
    auto u = model.scores("sofa");
    CHECK(u[0] == doctest::Approx(0.5));
    CHECK(u[1] == doctest::Approx(0.5));
    CHECK(model.predict("sofa") == "to store"); // uniform tie -> index 0
}

TEST_CASE("tfidf JSON round trip preserves predictions") {
    auto model = TfidfModel::fit(counting_corpus());
    auto back = TfidfModel::from_json(model.to_json());
    CHECK(back.affordances() == model.affordances());
    for (const char* label : {"desk", "chair", "box"}) {
        auto a = model.scores(label);
        auto b = back.scores(label);
        for (size_t i = 0; i < a.size(); ++i)
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(TfidfModel::from_json("{oops"), ParseError);
}

TEST_CASE("predict_tfidf labels every object in order") {
    auto corpus = counting_corpus();
    auto model = TfidfModel::fit(corpus);
    auto pred = predict_tfidf(model, corpus[0]);
    REQUIRE(pred.size() == 4);
    CHECK(pred[0] == "to work"); // desk
    CHECK(pred[2] == "to work"); // chair
    CHECK(pred[3] == "to store"); // box
}

TEST_CASE("neighbor vote with alpha = 1 reduces exactly to tfidf") {
    auto scenes = generate_corpus(make_default_config(13), 8);
    auto model = TfidfModel::fit(scenes);
    for (const auto& scene : scenes) {
        auto plain = predict_tfidf(model, scene);
        auto voted = predict_neighbor_vote(model, scene, {1.0});
        CHECK(plain == voted);
    }
}

TEST_CASE("neighbor vote blends neighbor means with alpha = 0.8") {
    auto corpus = counting_corpus();
    auto model = TfidfModel::fit(corpus);

    // two overlapping objects (boxes of half-width 0.5 at distance 0.8)
    // plus one isolated object far away
    SceneRecord scene;
    scene.scan_id = "v";
    scene.room_type = "office";
    scene.objects = {object_at(0, "desk", "to work", {0, 0, 0}),
                     object_at(1, "box", "to store", {0.8, 0, 0}),
                     object_at(2, "chair", "to work", {50, 0, 0})};

    auto desk = model.scores("desk");
    auto box = model.scores("box");
    auto chair = model.scores("chair");
    const auto& affs = model.affordances();

    auto argmax = [&](const std::vector<double>& v) {
        size_t best = 0;
        for (size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[best])
                best = i;
        return affs[best];
    };
    std::vector<double> blended_desk(desk.size()), blended_box(box.size());
    for (size_t t = 0; t < desk.size(); ++t) {
        blended_desk[t] = 0.8 * desk[t] + 0.2 * box[t];
        blended_box[t] = 0.8 * box[t] + 0.2 * desk[t];
    }
    auto voted = predict_neighbor_vote(model, scene, {0.8});
    REQUIRE(voted.size() == 3);
    CHECK(voted[0] == argmax(blended_desk));
    CHECK(voted[1] == argmax(blended_box));
    CHECK(voted[2] == argmax(chair)); // isolated: own scores only

    CHECK_THROWS_AS(predict_neighbor_vote(model, scene, {1.5}), DomainError);
}

TEST_CASE("neighbor vote can flip a label that tfidf alone gets wrong") {
    // "crate" is seen slightly more often as "to work" but every overlapping
    // neighbor is a strong "to store" indicator, so the vote flips it.
    SceneRecord train;
    train.scan_id = "train";
    train.room_type = "storage";
    train.objects = {object_at(0, "crate", "to work", {0, 0, 0}),
                     object_at(1, "crate", "to work", {20, 0, 0}),
                     object_at(2, "crate", "to store", {40, 0, 0}),
                     object_at(3, "shelf", "to store", {60, 0, 0}),
                     object_at(4, "shelf", "to store", {80, 0, 0})};
    auto model = TfidfModel::fit({train});
    CHECK(model.predict("crate") == "to work");

    SceneRecord scene;
    scene.scan_id = "test";
    scene.room_type = "storage";
    scene.objects = {object_at(0, "crate", "to store", {0, 0, 0}),
                     object_at(1, "shelf", "to store", {0.5, 0, 0}),
                     object_at(2, "shelf", "to store", {-0.5, 0, 0})};
    auto voted = predict_neighbor_vote(model, scene, {0.4});
    CHECK(voted[0] == "to store");
    auto plain = predict_tfidf(model, scene);
    CHECK(plain[0] == "to work");
}

TEST_CASE("tfidf on the separable synthetic catalog is near-perfect") {
    auto scenes = generate_corpus(make_default_config(29), 40);
    auto train = std::vector<SceneRecord>(scenes.begin(), scenes.begin() + 30);
    auto test = std::vector<SceneRecord>(scenes.begin() + 30, scenes.end());
    auto model = TfidfModel::fit(train);
    model.set_uniform_fallback(true);
    int total = 0, correct = 0;
    for (const auto& scene : test) {
        auto pred = predict_tfidf(model, scene);
        for (size_t i = 0; i < scene.objects.size(); ++i) {
            ++total;
            if (pred[i] == scene.objects[i].region_affordance)
                ++correct;
        }
    }
    // labels are disjoint across affordances, so accuracy must be perfect
    CHECK(correct == total);
}
