#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "artlab/dataset.hpp"
#include "artlab/matrix.hpp"

namespace artlab {

enum class LossKind { cross_entropy, cost_sensitive, focal, ohem, ldam_drw };

std::string to_string(LossKind kind);

// Which loss to minimise and its parameters. Fields irrelevant to `kind` are
// ignored.
struct LossSpec {
    LossKind kind = LossKind::cross_entropy;
    std::vector<double> class_weights;  // empty: unweighted
    double gamma = 2.0;                 // focal
    double ohem_fraction = 0.7;         // ohem
    std::vector<double> ldam_margins;   // ldam_drw
    int drw_start_epoch = 1;            // ldam_drw: first reweighted epoch
    std::vector<double> drw_priors;     // ldam_drw: training-set class priors

    // Whether the loss is built from per-class training counts.
    bool needs_class_counts() const;
};

// Mean loss, per-sample losses and the gradient of the mean w.r.t. the logits.
struct LossEval {
    double mean = 0.0;
    std::vector<double> per_sample;
    Matrix grad;
};

Matrix softmax(const Matrix& logits);

// Per-sample -w_y * log softmax(z)_y; the mean divides by sum of w_y.
LossEval cross_entropy(const Matrix& logits, std::span<const Label> labels,
                       std::span<const double> class_weights = {});

// Per-sample -w_y * (1 - p_y)^gamma * log p_y, normalised like cross_entropy.
LossEval focal_loss(const Matrix& logits, std::span<const Label> labels, double gamma,
                    std::span<const double> class_weights = {});

// Indices of the ceil(fraction * n) largest losses, ascending; ties favour the
// lower index.
std::vector<std::size_t> ohem_select(std::span<const double> per_sample_losses, double fraction);

// w_i = 1 / (K * prior_i); the prior-weighted mean of w is 1.
std::vector<double> cost_sensitive_weights(const ClassPrior& priors);

// Delta_i proportional to n_i^(-1/4), scaled so the largest margin equals max_margin.
std::vector<double> ldam_margins(std::span<const std::size_t> class_counts, double max_margin);

// All ones before drw_start_epoch, inverse-frequency weights from then on.
std::vector<double> drw_weights(int epoch, int drw_start_epoch, const ClassPrior& priors);

// Evaluates `spec` at 1-based `epoch` (only LDAM-DRW depends on it).
LossEval evaluate_loss(const LossSpec& spec, const Matrix& logits, std::span<const Label> labels, int epoch);

}  // namespace artlab
