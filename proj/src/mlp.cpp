#include "artlab/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "artlab/error.hpp"
#include "artlab/rng.hpp"

namespace artlab {

MlpModel::MlpModel(std::vector<std::size_t> layer_widths) : widths_(std::move(layer_widths)) {
    if (widths_.size() < 2) throw Error("MlpModel: need at least an input and an output width");
    for (std::size_t w : widths_)
        if (w == 0) throw Error("MlpModel: layer widths must be >= 1");
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        Layer layer{widths_[l], widths_[l + 1], offset, offset + widths_[l] * widths_[l + 1]};
        offset = layer.bias_offset + layer.out;
        layers_.push_back(layer);
    }
    params_.assign(offset, 0.0);
}

std::size_t MlpModel::layer_of(std::size_t index) const {
    for (std::size_t l = 0; l < layers_.size(); ++l)
        if (index < layers_[l].bias_offset + layers_[l].out) return l;
    throw Error("MlpModel::layer_of: index out of range");
}

MlpModel init_mlp(const std::vector<std::size_t>& layer_widths, std::uint64_t seed) {
    MlpModel model(layer_widths);
    Rng rng(seed);
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
        const double scale = std::sqrt(2.0 / static_cast<double>(model.layers()[l].in));
        for (double& w : model.weights(l)) w = scale * rng.normal();
    }
    return model;
}

namespace {

// z = a * W + b for every row of a.
void affine(const Matrix& a, std::span<const double> w, std::span<const double> b, Matrix& z) {
    const std::size_t in = a.cols();
    const std::size_t out = b.size();
    z = Matrix(a.rows(), out);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto zr = z.row(r);
        std::copy(b.begin(), b.end(), zr.begin());
        auto ar = a.row(r);
        for (std::size_t i = 0; i < in; ++i) {
            const double x = ar[i];
            if (x == 0.0) continue;
            const double* wi = w.data() + i * out;
            for (std::size_t o = 0; o < out; ++o) zr[o] += x * wi[o];
        }
    }
}

// activations[0] is the input; activations[l + 1] is the output of layer l
// (post-ReLU for hidden layers, raw logits for the last).
std::vector<Matrix> forward_all(const MlpModel& model, const Matrix& batch) {
    if (batch.cols() != model.input_width())
        throw Error("forward: batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                    std::to_string(model.input_width()));
    const std::size_t depth = model.layers().size();
    std::vector<Matrix> acts(depth + 1);
    acts[0] = batch;
    for (std::size_t l = 0; l < depth; ++l) {
        affine(acts[l], model.weights(l), model.bias(l), acts[l + 1]);
        if (l + 1 < depth)
            for (double& v : acts[l + 1].values()) v = std::max(v, 0.0);
    }
    return acts;
}

}  // namespace

Matrix forward(const MlpModel& model, const Matrix& batch) { return std::move(forward_all(model, batch).back()); }

std::vector<Label> predict(const MlpModel& model, const Matrix& batch) {
    const Matrix logits = forward(model, batch);
    std::vector<Label> out(logits.rows());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        auto row = logits.row(r);
        out[r] = static_cast<Label>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

BackwardResult backward(const MlpModel& model, const Matrix& batch, std::span<const Label> labels,
                        const LossSpec& loss_spec, int epoch) {
    auto acts = forward_all(model, batch);
    BackwardResult result{evaluate_loss(loss_spec, acts.back(), labels, epoch),
                          std::vector<double>(model.parameter_count(), 0.0)};

    Matrix delta = result.loss.grad;
    for (std::size_t l = model.layers().size(); l-- > 0;) {
        const auto& layer = model.layers()[l];
        const Matrix& a = acts[l];
        double* gw = result.grads.data() + layer.weight_offset;
        double* gb = result.grads.data() + layer.bias_offset;
        auto w = model.weights(l);
        Matrix prev(l > 0 ? a.rows() : 0, layer.in);
        for (std::size_t r = 0; r < a.rows(); ++r) {
            auto dr = delta.row(r);
            auto ar = a.row(r);
            for (std::size_t o = 0; o < layer.out; ++o) gb[o] += dr[o];
            for (std::size_t i = 0; i < layer.in; ++i) {
                const double x = ar[i];
                double* gwi = gw + i * layer.out;
                const double* wi = w.data() + i * layer.out;
                double back = 0.0;
                for (std::size_t o = 0; o < layer.out; ++o) {
                    gwi[o] += x * dr[o];
                    back += wi[o] * dr[o];
                }
                // ReLU derivative: the stored activation is positive iff the unit was active.
                if (l > 0) prev(r, i) = x > 0.0 ? back : 0.0;
            }
        }
        delta = std::move(prev);
    }
    return result;
}

}  // namespace artlab
