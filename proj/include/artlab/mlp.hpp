#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "artlab/dataset.hpp"
#include "artlab/losses.hpp"
#include "artlab/matrix.hpp"

namespace artlab {

// Feed-forward classifier: ReLU on hidden layers, identity on the output
// layer (softmax lives in the loss). All parameters sit in one flat vector;
// layer l stores its weights row-major as [in][out] followed by its biases.
class MlpModel {
public:
    struct Layer {
        std::size_t in = 0;
        std::size_t out = 0;
        std::size_t weight_offset = 0;
        std::size_t bias_offset = 0;
    };

    MlpModel() = default;
    explicit MlpModel(std::vector<std::size_t> layer_widths);

    const std::vector<std::size_t>& widths() const { return widths_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::size_t input_width() const { return widths_.front(); }
    std::size_t num_classes() const { return widths_.back(); }
    std::size_t parameter_count() const { return params_.size(); }

    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }

    std::span<double> weights(std::size_t l) { return {params_.data() + layers_[l].weight_offset, layers_[l].in * layers_[l].out}; }
    std::span<const double> weights(std::size_t l) const { return {params_.data() + layers_[l].weight_offset, layers_[l].in * layers_[l].out}; }
    std::span<double> bias(std::size_t l) { return {params_.data() + layers_[l].bias_offset, layers_[l].out}; }
    std::span<const double> bias(std::size_t l) const { return {params_.data() + layers_[l].bias_offset, layers_[l].out}; }

    // Layer index owning flat parameter `index`.
    std::size_t layer_of(std::size_t index) const;

private:
    std::vector<std::size_t> widths_;
    std::vector<Layer> layers_;
    std::vector<double> params_;
};

// He-scaled normal weights (variance 2 / fan_in), zero biases.
MlpModel init_mlp(const std::vector<std::size_t>& layer_widths, std::uint64_t seed);

Matrix forward(const MlpModel& model, const Matrix& batch);

// Row-wise argmax of the logits.
std::vector<Label> predict(const MlpModel& model, const Matrix& batch);

struct BackwardResult {
    LossEval loss;
    std::vector<double> grads;  // same layout as MlpModel::parameters()
};

BackwardResult backward(const MlpModel& model, const Matrix& batch, std::span<const Label> labels,
                        const LossSpec& loss_spec, int epoch = 1);

}  // namespace artlab
