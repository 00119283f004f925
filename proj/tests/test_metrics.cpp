#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "hsu/metrics.hpp"
#include "hsu/rng.hpp"

using namespace hsu;

namespace {

// Independent oracle: compute accuracy and per-class IoU straight from the
// (gt, pred) pair lists with set-style counting.
struct Oracle {
    double accuracy = 0.0;
    std::vector<double> iou; // -1 when the class never appears

    Oracle(const std::vector<int>& gt, const std::vector<int>& pred, int k) {
        int correct = 0;
        for (size_t i = 0; i < gt.size(); ++i)
            if (gt[i] == pred[i])
                ++correct;
        accuracy = gt.empty() ? 0.0 : static_cast<double>(correct) / gt.size();
        iou.assign(k, -1.0);
        for (int c = 0; c < k; ++c) {
            int tp = 0, fp = 0, fn = 0;
            for (size_t i = 0; i < gt.size(); ++i) {
                if (gt[i] == c && pred[i] == c)
                    ++tp;
                else if (gt[i] != c && pred[i] == c)
                    ++fp;
                else if (gt[i] == c && pred[i] != c)
                    ++fn;
            }
            if (tp + fp + fn > 0)
                iou[c] = static_cast<double>(tp) / (tp + fp + fn);
        }
    }

    double miou() const {
        double s = 0.0;
        int n = 0;
        for (double v : iou)
            if (v >= 0.0) {
                s += v;
                ++n;
            }
        return n == 0 ? 0.0 : s / n;
    }
};

} // namespace

TEST_CASE("confusion matrix hand case: IoU(tp=3, fp=1, fn=1) = 0.6") {
    ConfusionMatrix cm(2);
    for (int i = 0; i < 3; ++i)
        cm.accumulate(0, 0); // tp for class 0
    cm.accumulate(1, 0);     // fp for class 0
    cm.accumulate(0, 1);     // fn for class 0
    CHECK(cm.iou(0) == doctest::Approx(0.6));
    CHECK(cm.accuracy() == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("unpopulated classes are excluded from mIoU") {
    ConfusionMatrix cm(4);
    cm.accumulate(0, 0);
    cm.accumulate(1, 1);
    // classes 2 and 3 never appear
    CHECK(cm.miou() == doctest::Approx(1.0));
    auto m = summarize(cm);
    CHECK(m.per_class_iou[2] == doctest::Approx(-1.0));
    CHECK(m.per_class_iou[3] == doctest::Approx(-1.0));
    CHECK(m.support[0] == 1);
    CHECK(m.support[2] == 0);
}

TEST_CASE("randomized agreement with the pair-list oracle") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        int k = rng.uniform_int(2, 7);
        int n = rng.uniform_int(1, 60);
        std::vector<int> gt, pred;
        ConfusionMatrix cm(k);
        for (int i = 0; i < n; ++i) {
            gt.push_back(rng.uniform_int(0, k - 1));
            pred.push_back(rng.uniform_int(0, k - 1));
            cm.accumulate(gt.back(), pred.back());
        }
        Oracle oracle(gt, pred, k);
        CHECK(cm.accuracy() == doctest::Approx(oracle.accuracy).epsilon(1e-12));
        CHECK(cm.miou() == doctest::Approx(oracle.miou()).epsilon(1e-12));
        auto m = summarize(cm);
        for (int c = 0; c < k; ++c)
            CHECK(m.per_class_iou[c] == doctest::Approx(oracle.iou[c]).epsilon(1e-12));
    }
}

TEST_CASE("merge equals accumulating everything into one matrix") {
    Rng rng(7);
    ConfusionMatrix a(3), b(3), all(3);
    for (int i = 0; i < 100; ++i) {
        int gt = rng.uniform_int(0, 2), pred = rng.uniform_int(0, 2);
        (i % 2 ? a : b).accumulate(gt, pred);
        all.accumulate(gt, pred);
    }
    a.merge(b);
    CHECK(a.total() == all.total());
    for (int g = 0; g < 3; ++g)
        for (int p = 0; p < 3; ++p)
            CHECK(a.at(g, p) == all.at(g, p));
    CHECK(a.accuracy() == doctest::Approx(all.accuracy()));
    CHECK(a.miou() == doctest::Approx(all.miou()));
}

TEST_CASE("out-of-range indices are rejected") {
    ConfusionMatrix cm(3);
    CHECK_THROWS_AS(cm.accumulate(-1, 0), DomainError);
    CHECK_THROWS_AS(cm.accumulate(0, 3), DomainError);
}

TEST_CASE("empty matrix refuses to report metrics") {
    ConfusionMatrix cm(3);
    CHECK_THROWS_AS(cm.accuracy(), DomainError);
    CHECK_THROWS_AS(cm.miou(), DomainError);
}
