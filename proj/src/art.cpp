#include "artlab/art.hpp"

#include "artlab/error.hpp"
#include "artlab/metrics.hpp"
#include "artlab/resample.hpp"

namespace artlab {

std::vector<double> difficulty_scores(std::span<const double> f1_per_class) {
    std::vector<double> s;
    s.reserve(f1_per_class.size());
    for (double f : f1_per_class) {
        if (!(f >= 0.0 && f <= 1.0)) throw Error("difficulty_scores: F1 " + std::to_string(f) + " outside [0, 1]");
        s.push_back(1.0 - f);
    }
    return s;
}

std::vector<double> normalize_weights(std::span<const double> difficulty) {
    if (difficulty.empty()) throw Error("normalize_weights: no classes");
    double sum = 0.0;
    for (double s : difficulty) {
        if (!(s >= 0.0)) throw Error("normalize_weights: negative difficulty");
        sum += s;
    }
    if (sum == 0.0) return std::vector<double>(difficulty.size(), 1.0 / static_cast<double>(difficulty.size()));
    std::vector<double> w(difficulty.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = difficulty[i] / sum;
    return w;
}

AdaptiveWeights adaptive_weights(std::span<const double> f1_per_class) {
    AdaptiveWeights aw;
    aw.f1_per_class.assign(f1_per_class.begin(), f1_per_class.end());
    aw.difficulty = difficulty_scores(f1_per_class);
    aw.weights = normalize_weights(aw.difficulty);
    return aw;
}

SamplingDistribution blend(const ClassPrior& priors, std::span<const double> weights, double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw Error("blend: blending constant must lie in [0, 1]");
    if (priors.probs.size() != weights.size()) throw Error("blend: prior and weight sizes differ");
    require_simplex(priors.probs, "blend (priors)");
    require_simplex(weights, "blend (weights)");
    SamplingDistribution p{std::vector<double>(weights.size())};
    for (std::size_t i = 0; i < weights.size(); ++i) p.probs[i] = c * priors.probs[i] + (1.0 - c) * weights[i];
    return p;
}

SamplingDistribution initial_distribution(const ClassPrior& priors, double c, int num_classes) {
    if (num_classes < 1) throw Error("initial_distribution: need at least one class");
    const std::vector<double> uniform(static_cast<std::size_t>(num_classes), 1.0 / num_classes);
    return blend(priors, uniform, c);
}

ArtResult art_fit(MlpModel model, const Dataset& train, const Dataset& val, const ArtConfig& config,
                  Rng& shuffle_rng, Rng& resample_rng) {
    const double c = config.blending_constant;
    if (!(c >= 0.0 && c <= 1.0)) throw Error("art_fit: blending constant must lie in [0, 1]");
    if (config.boost_frequency < 1) throw Error("art_fit: boost frequency must be >= 1");
    const auto train_counts = train.class_counts();
    const auto val_counts = val.class_counts();
    for (std::size_t k = 0; k < train_counts.size(); ++k) {
        if (train_counts[k] == 0) throw Error("art_fit: class " + std::to_string(k) + " is absent from training data");
        if (val_counts[k] == 0) throw Error("art_fit: class " + std::to_string(k) + " is absent from validation data");
    }

    const ClassPrior priors = class_priors(train);
    const int k = train.num_classes();
    const std::size_t n = train.size();

    ArtResult result;
    SamplingDistribution p = initial_distribution(priors, c, k);
    Dataset initial = resample_to_distribution(train, p, n, resample_rng);
    result.boosts.push_back(
        {0, {}, {}, std::vector<double>(static_cast<std::size_t>(k), 1.0 / k), p.probs, initial.class_counts()});

    EpochHook hook = [&](const EpochContext& ctx) -> std::optional<Dataset> {
        if (ctx.epoch % config.boost_frequency != 0) return std::nullopt;
        const auto metrics = class_metrics(confusion(val.labels(), ctx.val_predictions, k));
        auto aw = adaptive_weights(metrics.f1);
        p = blend(priors, aw.weights, c);
        Dataset rebuilt = resample_to_distribution(train, p, n, resample_rng);
        result.boosts.push_back({ctx.epoch, std::move(aw.f1_per_class), std::move(aw.difficulty),
                                 std::move(aw.weights), p.probs, rebuilt.class_counts()});
        return rebuilt;
    };

    result.fit = fit(std::move(model), initial, val, LossSpec{}, config.trainer, shuffle_rng, hook);
    return result;
}

}  // namespace artlab
