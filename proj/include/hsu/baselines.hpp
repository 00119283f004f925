#pragma once

#include <map>
#include <string>
#include <vector>

#include "hsu/scene.hpp"

namespace hsu {

// TF-IDF over (object label, region affordance) co-occurrence. Each label's
// document is the multiset of affordances it was observed with in training.
class TfidfModel {
public:
    static TfidfModel fit(const std::vector<SceneRecord>& train_scenes);

    // Affordances in index order (lexicographic).
    const std::vector<std::string>& affordances() const { return affordances_; }
    // Scores for a label over all affordances; throws DomainError for an
    // unknown label unless uniform fallback is enabled.
    const std::vector<double>& scores(const std::string& label) const;
    bool knows(const std::string& label) const { return table_.count(label) > 0; }

    // Argmax over scores; ties break toward the lowest affordance index.
    std::string predict(const std::string& label) const;

    // Opt-in handling for labels unseen in training: every affordance gets
    // the same score, so predictions fall back to index 0 (or neighbors).
    void set_uniform_fallback(bool enabled) { uniform_fallback_ = enabled; }

    std::string to_json() const;
    static TfidfModel from_json(const std::string& text);

private:
    std::vector<std::string> affordances_;
    std::map<std::string, std::vector<double>> table_;
    bool uniform_fallback_ = false;
    std::vector<double> uniform_scores_;
};

struct NeighborVoteConfig {
    double alpha = 0.8;
};

// Blends each object's TF-IDF scores with the mean scores of its
// AABB-overlapping neighbors, then takes the argmax per object.
std::vector<std::string> predict_neighbor_vote(const TfidfModel& model,
                                               const SceneRecord& scene,
                                               const NeighborVoteConfig& cfg = {});

// Plain TF-IDF prediction for every object in the scene, in order.
std::vector<std::string> predict_tfidf(const TfidfModel& model,
                                       const SceneRecord& scene);

} // namespace hsu
