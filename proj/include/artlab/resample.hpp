#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "artlab/dataset.hpp"
#include "artlab/distribution.hpp"
#include "artlab/rng.hpp"

namespace artlab {

// Per-class row counts a resampler must produce.
struct ResamplePlan {
    std::vector<std::size_t> target_counts;
};

// Every non-empty class grown to the largest class count.
ResamplePlan balance_to_majority(const Dataset& ds);
// Every non-empty class shrunk to the smallest non-empty class count.
ResamplePlan balance_to_minority(const Dataset& ds);

// Random oversampling: keeps every original row and tops classes up with
// duplicates drawn with replacement. Targets must not be below source counts.
Dataset ros(const Dataset& ds, const ResamplePlan& plan, Rng& rng);

// Random undersampling without replacement. Targets must not exceed source counts.
Dataset rus(const Dataset& ds, const ResamplePlan& plan, Rng& rng);

// SMOTE: synthetic rows x + u * (x_nn - x), u ~ U[0, 1], x_nn among the k
// nearest same-class neighbours of x. Classes with a single row fall back to
// duplication.
Dataset smote(const Dataset& ds, std::size_t k, const ResamplePlan& plan, Rng& rng);

// MSMOTE, using the security/border/noise scheme. Each row of a grown class is
// typed by its k nearest neighbours over all classes: more than half from its
// own class is "security" (interpolate toward any of its k nearest same-class
// rows), none is "noise" (never used as a seed), anything else is "border"
// (interpolate toward the single nearest same-class row).
Dataset msmote(const Dataset& ds, std::size_t k, const ResamplePlan& plan, Rng& rng);

// NearMiss undersampling (version 1, 2 or 3). For each shrunk class the
// reference pool is the rows of every class that is not being shrunk.
//   v1: keep rows with the smallest mean distance to their 3 nearest pool rows
//   v2: keep rows with the smallest mean distance to their 3 farthest pool rows
//   v3: candidates are each pool row's `v3_candidates` nearest rows of the
//       class; keep candidates with the largest mean distance to their 3
//       nearest pool rows
Dataset nearmiss(const Dataset& ds, int version, const ResamplePlan& plan, Rng& rng,
                 std::size_t v3_candidates = 3);

// Per-class targets: largest-remainder rounding of total * p_i, with every
// class of positive probability given at least one row.
std::vector<std::size_t> distribution_targets(std::span<const double> p, std::size_t total);

// ROS/RUS to the counts of distribution_targets; output size equals `total`.
Dataset resample_to_distribution(const Dataset& ds, const SamplingDistribution& p, std::size_t total, Rng& rng);

// Row indices of the `k` nearest rows in `candidates` to `query` (Euclidean,
// ties by position in `candidates`), nearest first.
std::vector<std::size_t> nearest_rows(const Dataset& ds, std::span<const double> query,
                                      std::span<const std::size_t> candidates, std::size_t k);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace artlab
