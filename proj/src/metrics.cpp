#include "hsu/metrics.hpp"

#include <json.hpp>

namespace hsu {

ConfusionMatrix::ConfusionMatrix(int n_classes) : k_(n_classes) {
    if (n_classes <= 0)
        throw DomainError("ConfusionMatrix: class count must be positive");
    counts_.assign(static_cast<size_t>(k_) * k_, 0);
}

void ConfusionMatrix::accumulate(int gt, int pred) {
    if (gt < 0 || gt >= k_ || pred < 0 || pred >= k_)
        throw DomainError("ConfusionMatrix: index out of range");
    counts_[static_cast<size_t>(gt) * k_ + pred] += 1;
    total_ += 1;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.k_ != k_)
        throw DomainError("ConfusionMatrix: merge size mismatch");
    for (size_t i = 0; i < counts_.size(); ++i)
        counts_[i] += other.counts_[i];
    total_ += other.total_;
}

std::int64_t ConfusionMatrix::at(int gt, int pred) const {
    if (gt < 0 || gt >= k_ || pred < 0 || pred >= k_)
        throw DomainError("ConfusionMatrix: index out of range");
    return counts_[static_cast<size_t>(gt) * k_ + pred];
}

double ConfusionMatrix::accuracy() const {
    if (total_ == 0)
        throw DomainError("ConfusionMatrix: no samples");
    std::int64_t trace = 0;
    for (int c = 0; c < k_; ++c)
        trace += at(c, c);
    return static_cast<double>(trace) / static_cast<double>(total_);
}

double ConfusionMatrix::iou(int c) const {
    if (total_ == 0)
        throw DomainError("ConfusionMatrix: no samples");
    std::int64_t tp = at(c, c);
    std::int64_t fp = 0, fn = 0;
    for (int i = 0; i < k_; ++i) {
        if (i != c) {
            fp += at(i, c);
            fn += at(c, i);
        }
    }
    std::int64_t denom = tp + fp + fn;
    if (denom == 0)
        return 0.0;
    return static_cast<double>(tp) / static_cast<double>(denom);
}

double ConfusionMatrix::miou() const {
    if (total_ == 0)
        throw DomainError("ConfusionMatrix: no samples");
    double sum = 0.0;
    int populated = 0;
    for (int c = 0; c < k_; ++c) {
        std::int64_t tp = at(c, c);
        std::int64_t fp = 0, fn = 0;
        for (int i = 0; i < k_; ++i) {
            if (i != c) {
                fp += at(i, c);
                fn += at(c, i);
            }
        }
        if (tp + fp + fn > 0) {
            sum += static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
            ++populated;
        }
    }
    return populated > 0 ? sum / populated : 0.0;
}

TaskMetrics summarize(const ConfusionMatrix& cm) {
    TaskMetrics m;
    m.accuracy = cm.accuracy();
    m.miou = cm.miou();
    for (int c = 0; c < cm.n_classes(); ++c) {
        std::int64_t tp = cm.at(c, c);
        std::int64_t fp = 0, fn = 0;
        for (int i = 0; i < cm.n_classes(); ++i) {
            if (i != c) {
                fp += cm.at(i, c);
                fn += cm.at(c, i);
            }
        }
        m.per_class_iou.push_back(tp + fp + fn > 0 ? cm.iou(c) : -1.0);
        std::int64_t row_sum = tp + fn;
        m.support.push_back(row_sum);
    }
    return m;
}

namespace {

nlohmann::ordered_json task_to_json(const char* task, const TaskMetrics& m,
                                    const std::vector<std::string>& names) {
    nlohmann::ordered_json j;
    j["task"] = task;
    j["accuracy"] = m.accuracy;
    j["miou"] = m.miou;
    j["per_class_iou"] = nlohmann::ordered_json::object();
    j["support"] = nlohmann::ordered_json::object();
    for (size_t c = 0; c < m.per_class_iou.size(); ++c) {
        const std::string& name =
            c < names.size() ? names[c] : "class_" + std::to_string(c);
        if (m.per_class_iou[c] >= 0.0)
            j["per_class_iou"][name] = m.per_class_iou[c];
        j["support"][name] = m.support[c];
    }
    return j;
}

} // namespace

std::string metrics_report_to_json(const MetricsReport& report,
                                   const std::vector<std::string>& room_names,
                                   const std::vector<std::string>& region_names) {
    nlohmann::ordered_json j;
    j["room"] = task_to_json("room_classification", report.room, room_names);
    j["region"] = task_to_json("region_classification", report.region, region_names);
    return j.dump(2);
}

} // namespace hsu
