#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "artlab/dataset.hpp"
#include "artlab/distribution.hpp"
#include "artlab/trainer.hpp"

namespace artlab {

// Class difficulty derived from validation F1.
struct AdaptiveWeights {
    std::vector<double> f1_per_class;
    std::vector<double> difficulty;  // 1 - f1
    std::vector<double> weights;     // difficulty normalised onto the simplex
};

struct ArtConfig {
    double blending_constant = 0.5;  // c: 1 samples by the prior, 0 purely by difficulty
    int boost_frequency = 1;         // bf: epochs between distribution updates
    TrainerConfig trainer;
};

// s_i = 1 - f_i; each f_i must lie in [0, 1].
std::vector<double> difficulty_scores(std::span<const double> f1_per_class);

// w_i = s_i / sum_j s_j, or uniform when every s_i is zero.
std::vector<double> normalize_weights(std::span<const double> difficulty);

AdaptiveWeights adaptive_weights(std::span<const double> f1_per_class);

// p_i = c * prior_i + (1 - c) * w_i.
SamplingDistribution blend(const ClassPrior& priors, std::span<const double> weights, double c);

// blend() with uniform weights 1/K.
SamplingDistribution initial_distribution(const ClassPrior& priors, double c, int num_classes);

struct BoostRecord {
    int epoch = 0;                     // 0 for the initial distribution
    std::vector<double> f1;            // empty at epoch 0
    std::vector<double> difficulty;    // empty at epoch 0
    std::vector<double> weights;
    std::vector<double> probs;
    std::vector<std::size_t> counts;   // per-class rows of the rebuilt training set
};

struct ArtResult {
    FitResult fit;
    std::vector<BoostRecord> boosts;
};

// Trains on a class-resampled copy of `train` that is rebuilt from the
// original rows every `boost_frequency` epochs, with class proportions set by
// blending the training prior with validation-F1 difficulty weights.
ArtResult art_fit(MlpModel model, const Dataset& train, const Dataset& val, const ArtConfig& config,
                  Rng& shuffle_rng, Rng& resample_rng);

}  // namespace artlab
