#include "artlab/trainer.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "artlab/error.hpp"

namespace artlab {

AdamWState AdamWState::for_model(const MlpModel& model, const TrainerConfig& config) {
    AdamWState s;
    s.m.assign(model.parameter_count(), 0.0);
    s.v.assign(model.parameter_count(), 0.0);
    s.beta1 = config.beta1;
    s.beta2 = config.beta2;
    s.epsilon = config.epsilon;
    s.weight_decay = config.weight_decay;
    return s;
}

void adamw_step(AdamWState& state, MlpModel& model, std::span<const double> grads, double lr) {
    auto& params = model.parameters();
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw Error("adamw_step: gradient/moment shape does not match the model");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            throw Error("adamw_step: non-finite gradient in layer " + std::to_string(model.layer_of(i)));

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    const double decay = 1.0 - lr * state.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] *= decay;
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

double cosine_lr(int t, int total, double lr_max, double lr_min) {
    if (total < 1) throw Error("cosine_lr: total must be >= 1");
    if (t < 0 || t > total) throw Error("cosine_lr: epoch " + std::to_string(t) + " outside [0, " + std::to_string(total) + "]");
    if (t == total) return lr_min;
    const double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(total);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

StopDecision EarlyStopState::observe(double validation_loss, MlpModel& model) {
    ++epochs_seen;
    if (validation_loss < best_loss) {
        best_loss = validation_loss;
        best_epoch = epochs_seen;
        epochs_since_improvement = 0;
        best_parameters = model.parameters();
        return StopDecision::proceed;
    }
    ++epochs_since_improvement;
    if (epochs_since_improvement > patience) {
        restore_best(model);
        return StopDecision::stop;
    }
    return StopDecision::proceed;
}

void EarlyStopState::restore_best(MlpModel& model) const {
    if (!best_parameters.empty()) model.parameters() = best_parameters;
}

std::vector<std::size_t> layer_widths(std::size_t input_width, const TrainerConfig& config, std::size_t num_classes) {
    std::vector<std::size_t> widths{input_width};
    widths.insert(widths.end(), config.hidden_widths.begin(), config.hidden_widths.end());
    widths.push_back(num_classes);
    return widths;
}

FitResult fit(MlpModel model, const Dataset& train, const Dataset& val, const LossSpec& loss_spec,
              const TrainerConfig& config, Rng& shuffle_rng, const EpochHook& hook) {
    if (train.empty()) throw Error("fit: empty training set");
    if (val.empty()) throw Error("fit: empty validation set");
    if (config.batch_size == 0) throw Error("fit: batch_size must be >= 1");
    if (config.epochs < 1) throw Error("fit: epochs must be >= 1");
    if (loss_spec.needs_class_counts()) {
        const auto counts = train.class_counts();
        for (std::size_t c = 0; c < counts.size(); ++c)
            if (counts[c] == 0)
                throw Error("fit: class " + std::to_string(c) + " is absent from the training set but " +
                            to_string(loss_spec.kind) + " needs every class");
    }

    FitResult result{std::move(model), {}, 0, 0, false};
    MlpModel& net = result.model;
    AdamWState opt = AdamWState::for_model(net, config);
    EarlyStopState stopper(config.patience);

    Dataset current = train;
    std::vector<std::size_t> order;
    Matrix batch;
    std::vector<Label> batch_labels;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double lr = cosine_lr(epoch - 1, config.epochs, config.lr_max, config.lr_min);
        order.resize(current.size());
        std::iota(order.begin(), order.end(), 0);
        shuffle_rng.shuffle(std::span(order));

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            batch = Matrix(stop - start, current.dim());
            batch_labels.resize(stop - start);
            for (std::size_t r = start; r < stop; ++r) {
                auto src = current.row(order[r]);
                std::copy(src.begin(), src.end(), batch.row(r - start).begin());
                batch_labels[r - start] = current.label(order[r]);
            }
            auto step = backward(net, batch, batch_labels, loss_spec, epoch);
            if (!std::isfinite(step.loss.mean)) throw Error("fit: non-finite training loss at epoch " + std::to_string(epoch));
            loss_sum += step.loss.mean * static_cast<double>(stop - start);
            adamw_step(opt, net, step.grads, lr);
        }

        const Matrix val_logits = forward(net, val.features());
        const double val_loss = cross_entropy(val_logits, val.labels()).mean;
        result.history.push_back({epoch, lr, loss_sum / static_cast<double>(order.size()), val_loss});
        result.epochs_trained = epoch;

        if (hook) {
            std::vector<Label> preds(val_logits.rows());
            for (std::size_t r = 0; r < val_logits.rows(); ++r) {
                auto row = val_logits.row(r);
                preds[r] = static_cast<Label>(std::max_element(row.begin(), row.end()) - row.begin());
            }
            if (auto replacement = hook(EpochContext{epoch, net, val_logits, preds})) current = std::move(*replacement);
        }

        if (stopper.observe(val_loss, net) == StopDecision::stop) {
            result.stopped_early = true;
            break;
        }
    }
    stopper.restore_best(net);
    result.best_epoch = stopper.best_epoch;
    return result;
}

}  // namespace artlab
