#include "artlab/metrics.hpp"

#include <numeric>

#include "artlab/error.hpp"

namespace artlab {

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (int i = 0; i < k_; ++i) t += at(i, i);
    return t;
}

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred, int num_classes) {
    if (y_true.size() != y_pred.size()) throw Error("confusion: label vectors differ in length");
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= num_classes || y_pred[i] < 0 || y_pred[i] >= num_classes)
            throw Error("confusion: label out of range at position " + std::to_string(i));
        ++cm.at(y_true[i], y_pred[i]);
    }
    return cm;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) throw Error("class_metrics: empty confusion matrix");
    const int k = cm.num_classes();
    ClassMetrics m;
    m.precision.assign(static_cast<std::size_t>(k), 0.0);
    m.recall.assign(static_cast<std::size_t>(k), 0.0);
    m.f1.assign(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < k; ++i) {
        std::size_t predicted = 0, actual = 0;
        for (int j = 0; j < k; ++j) {
            predicted += cm.at(j, i);
            actual += cm.at(i, j);
        }
        const auto tp = static_cast<double>(cm.at(i, i));
        const auto c = static_cast<std::size_t>(i);
        if (predicted > 0) m.precision[c] = tp / static_cast<double>(predicted);
        if (actual > 0) m.recall[c] = tp / static_cast<double>(actual);
        const double pr = m.precision[c] + m.recall[c];
        if (pr > 0.0) m.f1[c] = 2.0 * m.precision[c] * m.recall[c] / pr;
    }
    const double kd = static_cast<double>(k);
    m.macro_precision = std::accumulate(m.precision.begin(), m.precision.end(), 0.0) / kd;
    m.macro_recall = std::accumulate(m.recall.begin(), m.recall.end(), 0.0) / kd;
    m.macro_f1 = std::accumulate(m.f1.begin(), m.f1.end(), 0.0) / kd;
    m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    return m;
}

}  // namespace artlab
