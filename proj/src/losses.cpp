#include "artlab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "artlab/error.hpp"

namespace artlab {

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::cross_entropy: return "cross_entropy";
        case LossKind::cost_sensitive: return "cost_sensitive";
        case LossKind::focal: return "focal";
        case LossKind::ohem: return "ohem";
        case LossKind::ldam_drw: return "ldam_drw";
    }
    return "unknown";
}

bool LossSpec::needs_class_counts() const {
    return kind == LossKind::cost_sensitive || kind == LossKind::ldam_drw;
}

namespace {

void check_inputs(const Matrix& logits, std::span<const Label> labels, std::span<const double> weights) {
    if (logits.rows() != labels.size()) throw Error("loss: logits rows do not match label count");
    const auto k = static_cast<Label>(logits.cols());
    for (Label y : labels)
        if (y < 0 || y >= k) throw Error("loss: label " + std::to_string(y) + " out of range");
    if (!weights.empty()) {
        if (weights.size() != logits.cols()) throw Error("loss: class weight count does not match class count");
        for (double w : weights)
            if (!(w > 0.0)) throw Error("loss: class weights must be strictly positive");
    }
}

double weight_of(std::span<const double> weights, Label y) {
    return weights.empty() ? 1.0 : weights[static_cast<std::size_t>(y)];
}

// Row-wise log-sum-exp shifted by the row max.
void log_softmax_row(std::span<const double> z, std::span<double> out) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = z[j] - lse;
}

}  // namespace

Matrix softmax(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        auto out = p.row(i);
        log_softmax_row(logits.row(i), out);
        for (double& v : out) v = std::exp(v);
    }
    return p;
}

LossEval cross_entropy(const Matrix& logits, std::span<const Label> labels, std::span<const double> class_weights) {
    return focal_loss(logits, labels, 0.0, class_weights);
}

LossEval focal_loss(const Matrix& logits, std::span<const Label> labels, double gamma,
                    std::span<const double> class_weights) {
    if (gamma < 0.0) throw Error("focal_loss: gamma must be >= 0");
    check_inputs(logits, labels, class_weights);
    const std::size_t n = logits.rows();
    const std::size_t k = logits.cols();
    LossEval out{0.0, std::vector<double>(n, 0.0), Matrix(n, k)};
    if (n == 0) return out;

    std::vector<double> logp(k);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = static_cast<std::size_t>(labels[i]);
        const double w = weight_of(class_weights, labels[i]);
        weight_sum += w;
        log_softmax_row(logits.row(i), logp);
        const double lp = logp[y];
        const double p = std::exp(lp);
        const double q = 1.0 - p;
        // dL/dz_j = coeff * (p_j - onehot_j) with coeff = w[(1-p)^g - g p (1-p)^(g-1) log p].
        double coeff = 0.0;
        if (gamma == 0.0) {
            out.per_sample[i] = -w * lp;
            coeff = w;
        } else {
            const double mod = std::pow(q, gamma);
            out.per_sample[i] = -w * mod * lp;
            const double tail = q > 0.0 ? gamma * p * std::pow(q, gamma - 1.0) * lp : 0.0;
            coeff = w * (mod - tail);
        }
        auto g = out.grad.row(i);
        for (std::size_t j = 0; j < k; ++j) g[j] = coeff * std::exp(logp[j]);
        g[y] -= coeff;
    }
    out.mean = std::accumulate(out.per_sample.begin(), out.per_sample.end(), 0.0) / weight_sum;
    for (double& v : out.grad.values()) v /= weight_sum;
    return out;
}

std::vector<std::size_t> ohem_select(std::span<const double> losses, double fraction) {
    if (losses.empty()) throw Error("ohem_select: empty batch");
    if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("ohem_select: fraction must lie in (0, 1]");
    const double scaled = fraction * static_cast<double>(losses.size());
    // Guard against 0.7 * 10 = 7.000000000000001 rounding up to 8.
    auto keep = static_cast<std::size_t>(std::ceil(scaled - 1e-9));
    keep = std::clamp<std::size_t>(keep, 1, losses.size());
    std::vector<std::size_t> order(losses.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<double> cost_sensitive_weights(const ClassPrior& priors) {
    const auto k = static_cast<double>(priors.probs.size());
    std::vector<double> w;
    w.reserve(priors.probs.size());
    for (std::size_t i = 0; i < priors.probs.size(); ++i) {
        if (!(priors.probs[i] > 0.0))
            throw Error("cost_sensitive_weights: class " + std::to_string(i) + " has zero prior");
        w.push_back(1.0 / (k * priors.probs[i]));
    }
    return w;
}

std::vector<double> ldam_margins(std::span<const std::size_t> class_counts, double max_margin) {
    if (!(max_margin > 0.0)) throw Error("ldam_margins: max_margin must be positive");
    std::vector<double> raw;
    raw.reserve(class_counts.size());
    for (std::size_t i = 0; i < class_counts.size(); ++i) {
        if (class_counts[i] == 0) throw Error("ldam_margins: class " + std::to_string(i) + " has no samples");
        raw.push_back(1.0 / std::pow(static_cast<double>(class_counts[i]), 0.25));
    }
    const double top = *std::max_element(raw.begin(), raw.end());
    for (double& m : raw) m *= max_margin / top;
    return raw;
}

std::vector<double> drw_weights(int epoch, int drw_start_epoch, const ClassPrior& priors) {
    if (epoch < drw_start_epoch) return std::vector<double>(priors.probs.size(), 1.0);
    return cost_sensitive_weights(priors);
}

LossEval evaluate_loss(const LossSpec& spec, const Matrix& logits, std::span<const Label> labels, int epoch) {
    switch (spec.kind) {
        case LossKind::cross_entropy:
        case LossKind::cost_sensitive:
            return cross_entropy(logits, labels, spec.class_weights);
        case LossKind::focal:
            return focal_loss(logits, labels, spec.gamma, spec.class_weights);
        case LossKind::ohem: {
            const auto full = cross_entropy(logits, labels, spec.class_weights);
            const auto picked = ohem_select(full.per_sample, spec.ohem_fraction);
            Matrix sub(picked.size(), logits.cols());
            std::vector<Label> sub_labels(picked.size());
            for (std::size_t r = 0; r < picked.size(); ++r) {
                auto src = logits.row(picked[r]);
                std::copy(src.begin(), src.end(), sub.row(r).begin());
                sub_labels[r] = labels[picked[r]];
            }
            const auto part = cross_entropy(sub, sub_labels, spec.class_weights);
            LossEval out{part.mean, full.per_sample, Matrix(logits.rows(), logits.cols())};
            for (std::size_t r = 0; r < picked.size(); ++r) {
                auto g = part.grad.row(r);
                std::copy(g.begin(), g.end(), out.grad.row(picked[r]).begin());
            }
            return out;
        }
        case LossKind::ldam_drw: {
            if (spec.ldam_margins.size() != logits.cols())
                throw Error("ldam_drw: margin count does not match class count");
            check_inputs(logits, labels, {});
            // Subtracting the margin is a constant shift, so the gradient w.r.t.
            // the original logits equals that w.r.t. the shifted ones.
            Matrix shifted = logits;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                const auto y = static_cast<std::size_t>(labels[i]);
                shifted(i, y) -= spec.ldam_margins[y];
            }
            if (spec.drw_priors.empty()) return cross_entropy(shifted, labels);
            const auto w = drw_weights(epoch, spec.drw_start_epoch, ClassPrior{spec.drw_priors});
            return cross_entropy(shifted, labels, w);
        }
    }
    throw Error("evaluate_loss: unknown loss kind");
}

}  // namespace artlab
