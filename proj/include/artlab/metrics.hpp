#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "artlab/dataset.hpp"

namespace artlab {

// counts[t * K + p]: rows are true classes, columns predictions.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_classes = 0)
        : k_(num_classes), counts_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {}

    int num_classes() const { return k_; }
    std::size_t& at(int truth, int pred) { return counts_[index(truth, pred)]; }
    std::size_t at(int truth, int pred) const { return counts_[index(truth, pred)]; }
    std::size_t total() const;
    std::size_t trace() const;

private:
    std::size_t index(int t, int p) const { return static_cast<std::size_t>(t) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(p); }
    int k_;
    std::vector<std::size_t> counts_;
};

struct ClassMetrics {
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
};

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred, int num_classes);

// Zero denominators yield 0 for the affected precision, recall or F1.
ClassMetrics class_metrics(const ConfusionMatrix& cm);

}  // namespace artlab
