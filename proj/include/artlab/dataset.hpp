#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "artlab/matrix.hpp"
#include "artlab/rng.hpp"

namespace artlab {

using Label = int;

// Labelled feature matrix. Rows of `features` align with `labels`; every
// label lies in [0, num_classes).
class Dataset {
public:
    Dataset() = default;
    Dataset(Matrix features, std::vector<Label> labels, int num_classes,
            std::vector<std::string> class_names = {});

    std::size_t size() const { return labels_.size(); }
    std::size_t dim() const { return features_.cols(); }
    int num_classes() const { return num_classes_; }
    bool empty() const { return labels_.empty(); }

    const Matrix& features() const { return features_; }
    Matrix& features() { return features_; }
    const std::vector<Label>& labels() const { return labels_; }
    std::span<const double> row(std::size_t i) const { return features_.row(i); }
    Label label(std::size_t i) const { return labels_[i]; }

    // Original label text per class id (empty when built in memory).
    const std::vector<std::string>& class_names() const { return class_names_; }

    std::vector<std::size_t> class_counts() const;
    // Row indices grouped by class: result[i] lists the rows of class i in order.
    std::vector<std::vector<std::size_t>> indices_by_class() const;

    Dataset subset(std::span<const std::size_t> rows) const;

private:
    Matrix features_;
    std::vector<Label> labels_;
    int num_classes_ = 0;
    std::vector<std::string> class_names_;
};

// Reads a header-first comma-separated file. Integer labels map to class ids
// in ascending numeric order; any other label text maps in order of first
// appearance. The mapping is kept in Dataset::class_names().
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column);

struct ClassPrior {
    std::vector<double> probs;
};

ClassPrior class_priors(const Dataset& ds);

// Population mean/std per column, fitted on training rows only.
struct ZScoreStats {
    std::vector<double> means;
    std::vector<double> stds;
};

ZScoreStats zscore_fit(const Dataset& ds);
// Columns with zero spread map to 0.
Dataset zscore_apply(const ZScoreStats& stats, const Dataset& ds);

struct SplitFractions {
    double train = 0.70;
    double validation = 0.15;
    double test = 0.15;
};

struct SplitBundle {
    Dataset train;
    Dataset validation;
    Dataset test;
};

// Integer apportionment of `total` units proportional to `shares` (which need
// not be normalised). Floors first, then leftover units go to the largest
// fractional parts; equal remainders favour the lower index.
std::vector<std::size_t> largest_remainder(std::span<const double> shares, std::size_t total);

// Per-class allocation by largest remainder. Classes with at least three rows
// get at least one row in every part.
SplitBundle stratified_split(const Dataset& ds, const SplitFractions& fractions, Rng& rng);

// Keeps `majority_class` whole and subsamples every other class to
// round(n_majority / ratio) rows (capped at what the class has). Surviving
// rows keep their original relative order.
Dataset make_imbalanced(const Dataset& ds, double ratio, Label majority_class, Rng& rng);

}  // namespace artlab
