#include "hsu/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

namespace hsu {

namespace {

using ordered_json = nlohmann::ordered_json;

size_t argmax_lowest_tie(const std::vector<double>& scores) {
    size_t best = 0;
    for (size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best])
            best = i;
    return best;
}

} // namespace

TfidfModel TfidfModel::fit(const std::vector<SceneRecord>& train_scenes) {
    if (train_scenes.empty())
        throw DomainError("TfidfModel::fit: empty corpus");

    // Per-label affordance counts (the label's "document").
    std::map<std::string, std::map<std::string, int>> docs;
    std::set<std::string> affordance_set;
    for (const auto& scene : train_scenes) {
        for (const auto& obj : scene.objects) {
            docs[obj.semantic_label][obj.region_affordance] += 1;
            affordance_set.insert(obj.region_affordance);
        }
    }
    if (docs.empty())
        throw DomainError("TfidfModel::fit: corpus has no objects");

    TfidfModel model;
    model.affordances_.assign(affordance_set.begin(), affordance_set.end());
    const double n_docs = static_cast<double>(docs.size());

    // Smoothed IDF: ln((1 + N) / (1 + df)) + 1.
    std::vector<double> idf(model.affordances_.size(), 0.0);
    for (size_t t = 0; t < model.affordances_.size(); ++t) {
        int df = 0;
        for (const auto& [label, counts] : docs)
            if (counts.count(model.affordances_[t]))
                ++df;
        idf[t] = std::log((1.0 + n_docs) / (1.0 + df)) + 1.0;
    }

    for (const auto& [label, counts] : docs) {
        double doc_len = 0.0;
        for (const auto& [aff, count] : counts)
            doc_len += count;
        std::vector<double> scores(model.affordances_.size(), 0.0);
        for (size_t t = 0; t < model.affordances_.size(); ++t) {
            auto it = counts.find(model.affordances_[t]);
            double tf = it == counts.end() ? 0.0 : it->second / doc_len;
            scores[t] = tf * idf[t];
        }
        model.table_.emplace(label, std::move(scores));
    }
    model.uniform_scores_.assign(model.affordances_.size(),
                                 1.0 / static_cast<double>(model.affordances_.size()));
    return model;
}

const std::vector<double>& TfidfModel::scores(const std::string& label) const {
    auto it = table_.find(label);
    if (it != table_.end())
        return it->second;
    if (uniform_fallback_)
        return uniform_scores_;
    throw DomainError("TfidfModel: unknown label '" + label + "'");
}

std::string TfidfModel::predict(const std::string& label) const {
    return affordances_[argmax_lowest_tie(scores(label))];
}

std::string TfidfModel::to_json() const {
    ordered_json j;
    j["affordances"] = affordances_;
    j["scores"] = ordered_json::object();
    for (const auto& [label, scores] : table_)
        j["scores"][label] = scores;
    return j.dump(2);
}

TfidfModel TfidfModel::from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tfidf JSON: ") + e.what());
    }
    TfidfModel model;
    try {
        model.affordances_ = j.at("affordances").get<std::vector<std::string>>();
        for (const auto& [label, scores] : j.at("scores").items()) {
            auto v = scores.get<std::vector<double>>();
            if (v.size() != model.affordances_.size())
                throw ParseError("tfidf JSON: score row length mismatch for '" + label + "'");
            model.table_.emplace(label, std::move(v));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tfidf JSON: ") + e.what());
    }
    model.uniform_scores_.assign(model.affordances_.size(),
                                 1.0 / static_cast<double>(model.affordances_.size()));
    return model;
}

std::vector<std::string> predict_tfidf(const TfidfModel& model,
                                       const SceneRecord& scene) {
    std::vector<std::string> out;
    out.reserve(scene.objects.size());
    for (const auto& obj : scene.objects)
        out.push_back(model.predict(obj.semantic_label));
    return out;
}

std::vector<std::string> predict_neighbor_vote(const TfidfModel& model,
                                               const SceneRecord& scene,
                                               const NeighborVoteConfig& cfg) {
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
        throw DomainError("neighbor vote: alpha must be in [0, 1]");
    const size_t n = scene.objects.size();
    std::vector<Aabb> boxes;
    boxes.reserve(n);
    for (const auto& obj : scene.objects)
        boxes.push_back(obj.box());

    std::vector<std::string> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const auto& own = model.scores(scene.objects[i].semantic_label);
        std::vector<double> neighbor_mean(own.size(), 0.0);
        int n_neighbors = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j == i || !aabb_overlap(boxes[i], boxes[j]))
                continue;
            const auto& neighbor = model.scores(scene.objects[j].semantic_label);
            for (size_t t = 0; t < neighbor.size(); ++t)
                neighbor_mean[t] += neighbor[t];
            ++n_neighbors;
        }
        std::vector<double> blended(own.size());
        if (n_neighbors == 0) {
            // Isolated objects keep their own scores.
            blended = own;
        } else {
            for (size_t t = 0; t < own.size(); ++t)
                blended[t] = cfg.alpha * own[t] +
                             (1.0 - cfg.alpha) * neighbor_mean[t] / n_neighbors;
        }
        out.push_back(model.affordances()[argmax_lowest_tie(blended)]);
    }
    return out;
}

} // namespace hsu
