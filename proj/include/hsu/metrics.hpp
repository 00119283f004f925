#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsu/error.hpp"

namespace hsu {

// k x k confusion counts; rows are ground truth, columns are predictions.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int n_classes);

    void accumulate(int gt, int pred);
    void merge(const ConfusionMatrix& other);

    int n_classes() const { return k_; }
    std::int64_t total() const { return total_; }
    std::int64_t at(int gt, int pred) const;

    double accuracy() const;           // trace / total
    double iou(int c) const;           // TP / (TP + FP + FN)
    // Mean IoU over classes with TP + FP + FN > 0.
    double miou() const;

private:
    int k_;
    std::int64_t total_ = 0;
    std::vector<std::int64_t> counts_;
};

struct TaskMetrics {
    double accuracy = 0.0;
    double miou = 0.0;
    std::vector<double> per_class_iou;       // -1 for unpopulated classes
    std::vector<std::int64_t> support;       // ground-truth count per class
};

TaskMetrics summarize(const ConfusionMatrix& cm);

struct MetricsReport {
    TaskMetrics room;
    TaskMetrics region;
};

std::string metrics_report_to_json(const MetricsReport& report,
                                   const std::vector<std::string>& room_names,
                                   const std::vector<std::string>& region_names);

} // namespace hsu
