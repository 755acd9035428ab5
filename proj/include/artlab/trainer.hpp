#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "artlab/dataset.hpp"
#include "artlab/losses.hpp"
#include "artlab/mlp.hpp"
#include "artlab/rng.hpp"

namespace artlab {

struct TrainerConfig {
    std::vector<std::size_t> hidden_widths{64};
    std::size_t batch_size = 32;
    int epochs = 200;
    double lr_max = 1e-3;
    double lr_min = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-2;
    int patience = 10;
};

struct AdamWState {
    std::vector<double> m;
    std::vector<double> v;
    long long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-2;

    static AdamWState for_model(const MlpModel& model, const TrainerConfig& config);
};

// One AdamW update at learning rate `lr`: parameters first shrink by
// (1 - lr * weight_decay), then take the bias-corrected Adam step.
void adamw_step(AdamWState& state, MlpModel& model, std::span<const double> grads, double lr);

// lr_min + (lr_max - lr_min) * (1 + cos(pi * t / total)) / 2, for 0 <= t <= total.
double cosine_lr(int t, int total, double lr_max, double lr_min);

enum class StopDecision { proceed, stop };

struct EarlyStopState {
    explicit EarlyStopState(int patience_epochs = 10) : patience(patience_epochs) {}

    double best_loss = std::numeric_limits<double>::infinity();
    int epochs_since_improvement = 0;
    int patience = 10;
    int best_epoch = 0;
    int epochs_seen = 0;
    std::vector<double> best_parameters;

    // Records one epoch's validation loss. A strict decrease snapshots the
    // model; more than `patience` epochs without one restores the snapshot
    // into `model` and returns stop.
    StopDecision observe(double validation_loss, MlpModel& model);
    void restore_best(MlpModel& model) const;
};

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct EpochContext {
    int epoch = 0;  // 1-based
    const MlpModel& model;
    const Matrix& val_logits;
    std::span<const Label> val_predictions;
};

// Called after every epoch. Returning a dataset replaces the training set
// from the next epoch on.
using EpochHook = std::function<std::optional<Dataset>(const EpochContext&)>;

struct FitResult {
    MlpModel model;                // parameters of the best validation epoch
    std::vector<EpochRecord> history;
    int epochs_trained = 0;
    int best_epoch = 0;
    bool stopped_early = false;
};

// Minibatch AdamW training with a per-epoch cosine schedule and early stopping
// on the unweighted validation cross-entropy.
FitResult fit(MlpModel model, const Dataset& train, const Dataset& val, const LossSpec& loss_spec,
              const TrainerConfig& config, Rng& shuffle_rng, const EpochHook& hook = {});

std::vector<std::size_t> layer_widths(std::size_t input_width, const TrainerConfig& config, std::size_t num_classes);

}  // namespace artlab
