#include "artlab/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "artlab/error.hpp"

namespace artlab {

void require_simplex(std::span<const double> p, const char* what, double tol) {
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0) throw Error(std::string(what) + ": probabilities must be finite and >= 0");
        sum += v;
    }
    if (std::abs(sum - 1.0) > tol) throw Error(std::string(what) + ": probabilities sum to " + std::to_string(sum));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

std::vector<std::size_t> nearest_rows(const Dataset& ds, std::span<const double> query,
                                      std::span<const std::size_t> candidates, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(candidates.size());
    for (std::size_t pos = 0; pos < candidates.size(); ++pos)
        scored.emplace_back(squared_distance(query, ds.row(candidates[pos])), pos);
    k = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = candidates[scored[i].second];
    return out;
}

ResamplePlan balance_to_majority(const Dataset& ds) {
    auto counts = ds.class_counts();
    const std::size_t top = *std::max_element(counts.begin(), counts.end());
    for (auto& c : counts)
        if (c > 0) c = top;
    return {counts};
}

ResamplePlan balance_to_minority(const Dataset& ds) {
    auto counts = ds.class_counts();
    std::size_t low = 0;
    for (auto c : counts)
        if (c > 0 && (low == 0 || c < low)) low = c;
    for (auto& c : counts)
        if (c > 0) c = low;
    return {counts};
}

namespace {

// Collects original rows (by index) and synthetic rows, then shuffles.
class Builder {
public:
    explicit Builder(const Dataset& ds) : ds_(ds), synth_(0, ds.dim()) {}

    void keep(std::size_t row) { rows_.push_back(row); }
    void add_synthetic(std::span<const double> x, Label y) {
        synth_.append_row(x);
        synth_labels_.push_back(y);
    }

    Dataset finish(Rng& rng) {
        const std::size_t total = rows_.size() + synth_labels_.size();
        std::vector<std::size_t> order(total);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span(order));
        Matrix x(total, ds_.dim());
        std::vector<Label> y(total);
        for (std::size_t i = 0; i < total; ++i) {
            const std::size_t src = order[i];
            std::span<const double> values;
            if (src < rows_.size()) {
                values = ds_.row(rows_[src]);
                y[i] = ds_.label(rows_[src]);
            } else {
                values = synth_.row(src - rows_.size());
                y[i] = synth_labels_[src - rows_.size()];
            }
            std::copy(values.begin(), values.end(), x.row(i).begin());
        }
        return Dataset(std::move(x), std::move(y), ds_.num_classes(), ds_.class_names());
    }

private:
    const Dataset& ds_;
    std::vector<std::size_t> rows_;
    Matrix synth_;
    std::vector<Label> synth_labels_;
};

void check_plan(const Dataset& ds, const ResamplePlan& plan, const char* who) {
    if (plan.target_counts.size() != static_cast<std::size_t>(ds.num_classes()))
        throw Error(std::string(who) + ": plan has " + std::to_string(plan.target_counts.size()) + " targets for " +
                    std::to_string(ds.num_classes()) + " classes");
    const auto counts = ds.class_counts();
    std::size_t total = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (plan.target_counts[c] > 0 && counts[c] == 0)
            throw Error(std::string(who) + ": class " + std::to_string(c) + " is empty but has a positive target");
        total += plan.target_counts[c];
    }
    if (total == 0) throw Error(std::string(who) + ": plan requests no rows");
}

void require_growth(const std::vector<std::size_t>& counts, const ResamplePlan& plan, const char* who) {
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (plan.target_counts[c] < counts[c])
            throw Error(std::string(who) + ": target " + std::to_string(plan.target_counts[c]) + " for class " +
                        std::to_string(c) + " is below its " + std::to_string(counts[c]) + " source rows");
}

void require_shrink(const std::vector<std::size_t>& counts, const ResamplePlan& plan, const char* who) {
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (plan.target_counts[c] > counts[c])
            throw Error(std::string(who) + ": target " + std::to_string(plan.target_counts[c]) + " for class " +
                        std::to_string(c) + " exceeds its " + std::to_string(counts[c]) + " source rows");
}

void duplicate_into(Builder& out, const std::vector<std::size_t>& rows, std::size_t extra, Rng& rng) {
    for (std::size_t i = 0; i < extra; ++i) out.keep(rows[rng.below(rows.size())]);
}

void sample_without_replacement(Builder& out, std::vector<std::size_t> rows, std::size_t keep, Rng& rng) {
    rng.shuffle(std::span(rows));
    for (std::size_t i = 0; i < keep; ++i) out.keep(rows[i]);
}

void interpolate(Builder& out, const Dataset& ds, std::size_t from, std::size_t to, Rng& rng) {
    const double gap = rng.uniform();
    auto a = ds.row(from);
    auto b = ds.row(to);
    std::vector<double> x(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) x[j] = a[j] + gap * (b[j] - a[j]);
    out.add_synthetic(x, ds.label(from));
}

// k nearest rows among `pool`, excluding `self`.
std::vector<std::size_t> neighbours(const Dataset& ds, std::size_t self, const std::vector<std::size_t>& pool,
                                    std::size_t k) {
    std::vector<std::size_t> others;
    others.reserve(pool.size());
    for (std::size_t r : pool)
        if (r != self) others.push_back(r);
    return nearest_rows(ds, ds.row(self), others, k);
}

}  // namespace

Dataset ros(const Dataset& ds, const ResamplePlan& plan, Rng& rng) {
    check_plan(ds, plan, "ros");
    const auto counts = ds.class_counts();
    require_growth(counts, plan, "ros");
    Builder out(ds);
    const auto groups = ds.indices_by_class();
    for (std::size_t c = 0; c < groups.size(); ++c) {
        for (std::size_t r : groups[c]) out.keep(r);
        duplicate_into(out, groups[c], plan.target_counts[c] - counts[c], rng);
    }
    return out.finish(rng);
}

Dataset rus(const Dataset& ds, const ResamplePlan& plan, Rng& rng) {
    check_plan(ds, plan, "rus");
    require_shrink(ds.class_counts(), plan, "rus");
    Builder out(ds);
    const auto groups = ds.indices_by_class();
    for (std::size_t c = 0; c < groups.size(); ++c)
        sample_without_replacement(out, groups[c], plan.target_counts[c], rng);
    return out.finish(rng);
}

Dataset smote(const Dataset& ds, std::size_t k, const ResamplePlan& plan, Rng& rng) {
    if (k < 1) throw Error("smote: k must be >= 1");
    check_plan(ds, plan, "smote");
    const auto counts = ds.class_counts();
    require_growth(counts, plan, "smote");
    Builder out(ds);
    const auto groups = ds.indices_by_class();
    for (std::size_t c = 0; c < groups.size(); ++c) {
        const auto& rows = groups[c];
        for (std::size_t r : rows) out.keep(r);
        const std::size_t extra = plan.target_counts[c] - counts[c];
        if (extra == 0) continue;
        if (rows.size() < 2) {
            warn("smote: class " + std::to_string(c) + " has a single row; duplicating instead of interpolating");
            duplicate_into(out, rows, extra, rng);
            continue;
        }
        const std::size_t k_eff = std::min(k, rows.size() - 1);
        std::vector<std::vector<std::size_t>> nn(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) nn[i] = neighbours(ds, rows[i], rows, k_eff);
        for (std::size_t s = 0; s < extra; ++s) {
            const std::size_t seed = rng.below(rows.size());
            const std::size_t partner = nn[seed][rng.below(nn[seed].size())];
            interpolate(out, ds, rows[seed], partner, rng);
        }
    }
    return out.finish(rng);
}

Dataset msmote(const Dataset& ds, std::size_t k, const ResamplePlan& plan, Rng& rng) {
    if (k < 1) throw Error("msmote: k must be >= 1");
    check_plan(ds, plan, "msmote");
    const auto counts = ds.class_counts();
    require_growth(counts, plan, "msmote");
    Builder out(ds);
    const auto groups = ds.indices_by_class();
    std::vector<std::size_t> everyone(ds.size());
    std::iota(everyone.begin(), everyone.end(), 0);

    for (std::size_t c = 0; c < groups.size(); ++c) {
        const auto& rows = groups[c];
        for (std::size_t r : rows) out.keep(r);
        const std::size_t extra = plan.target_counts[c] - counts[c];
        if (extra == 0) continue;
        if (rows.size() < 2) {
            warn("msmote: class " + std::to_string(c) + " has a single row; duplicating instead of interpolating");
            duplicate_into(out, rows, extra, rng);
            continue;
        }
        const std::size_t k_all = std::min(k, ds.size() - 1);
        const std::size_t k_same = std::min(k, rows.size() - 1);

        struct SeedRow {
            std::size_t row;
            std::vector<std::size_t> partners;
        };
        std::vector<SeedRow> seeds;
        for (std::size_t r : rows) {
            const auto nn = neighbours(ds, r, everyone, k_all);
            const auto same = static_cast<std::size_t>(
                std::count_if(nn.begin(), nn.end(), [&](std::size_t q) { return ds.label(q) == static_cast<Label>(c); }));
            if (same == 0) continue;  // latent noise
            auto partners = neighbours(ds, r, rows, k_same);
            if (2 * same <= nn.size()) partners.resize(1);  // border: nearest same-class row only
            seeds.push_back({r, std::move(partners)});
        }
        if (seeds.empty()) {
            warn("msmote: every row of class " + std::to_string(c) + " is noise; duplicating instead");
            duplicate_into(out, rows, extra, rng);
            continue;
        }
        for (std::size_t s = 0; s < extra; ++s) {
            const auto& seed = seeds[rng.below(seeds.size())];
            interpolate(out, ds, seed.row, seed.partners[rng.below(seed.partners.size())], rng);
        }
    }
    return out.finish(rng);
}

Dataset nearmiss(const Dataset& ds, int version, const ResamplePlan& plan, Rng& rng, std::size_t v3_candidates) {
    if (version < 1 || version > 3) throw Error("nearmiss: version must be 1, 2 or 3");
    if (v3_candidates < 1) throw Error("nearmiss: v3 candidate count must be >= 1");
    check_plan(ds, plan, "nearmiss");
    const auto counts = ds.class_counts();
    require_shrink(counts, plan, "nearmiss");
    constexpr std::size_t kNeighbours = 3;

    const auto groups = ds.indices_by_class();
    std::vector<std::size_t> kept_pool;
    for (std::size_t c = 0; c < groups.size(); ++c)
        if (plan.target_counts[c] >= counts[c]) kept_pool.insert(kept_pool.end(), groups[c].begin(), groups[c].end());

    Builder out(ds);
    bool warned = false;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        const std::size_t target = plan.target_counts[c];
        std::vector<std::size_t> rows = groups[c];
        if (target >= rows.size()) {
            for (std::size_t r : rows) out.keep(r);
            continue;
        }
        std::vector<std::size_t> pool = kept_pool;
        if (pool.empty())
            for (std::size_t r = 0; r < ds.size(); ++r)
                if (ds.label(r) != static_cast<Label>(c)) pool.push_back(r);
        if (pool.empty()) throw Error("nearmiss: no reference rows outside class " + std::to_string(c));
        const std::size_t nn = std::min(kNeighbours, pool.size());
        if (nn < kNeighbours && !warned) {
            warn("nearmiss: only " + std::to_string(pool.size()) + " reference rows; using " + std::to_string(nn) +
                 " neighbours");
            warned = true;
        }

        // Shuffle first so equal scores are broken by the rng, then stable-sort.
        rng.shuffle(std::span(rows));
        auto score = [&](std::size_t r, bool farthest) {
            std::vector<double> dist(pool.size());
            for (std::size_t i = 0; i < pool.size(); ++i) dist[i] = std::sqrt(squared_distance(ds.row(r), ds.row(pool[i])));
            if (farthest)
                std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(nn), dist.end(), std::greater<>());
            else
                std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(nn), dist.end());
            return std::accumulate(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(nn), 0.0) / static_cast<double>(nn);
        };

        std::vector<std::pair<double, std::size_t>> ranked;
        if (version == 3) {
            std::vector<bool> candidate(ds.size(), false);
            for (std::size_t p : pool)
                for (std::size_t r : nearest_rows(ds, ds.row(p), rows, v3_candidates)) candidate[r] = true;
            std::vector<std::pair<double, std::size_t>> others;
            for (std::size_t r : rows) (candidate[r] ? ranked : others).emplace_back(-score(r, false), r);
            auto by_score = [](const auto& a, const auto& b) { return a.first < b.first; };
            std::stable_sort(ranked.begin(), ranked.end(), by_score);
            std::stable_sort(others.begin(), others.end(), by_score);
            if (ranked.size() < target)
                warn("nearmiss-3: class " + std::to_string(c) + " has " + std::to_string(ranked.size()) +
                     " candidates for " + std::to_string(target) + " slots; filling from the remaining rows");
            ranked.insert(ranked.end(), others.begin(), others.end());
        } else {
            for (std::size_t r : rows) ranked.emplace_back(score(r, version == 2), r);
            std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        }
        for (std::size_t i = 0; i < target; ++i) out.keep(ranked[i].second);
    }
    return out.finish(rng);
}

std::vector<std::size_t> distribution_targets(std::span<const double> p, std::size_t total) {
    require_simplex(p, "distribution_targets");
    const auto positive = static_cast<std::size_t>(std::count_if(p.begin(), p.end(), [](double v) { return v > 0.0; }));
    if (total < positive)
        throw Error("distribution_targets: " + std::to_string(total) + " rows cannot cover " + std::to_string(positive) +
                    " classes");
    auto counts = largest_remainder(p, total);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (p[c] <= 0.0 || counts[c] > 0) continue;
        const auto donor = std::max_element(counts.begin(), counts.end());
        --*donor;
        counts[c] = 1;
    }
    return counts;
}

Dataset resample_to_distribution(const Dataset& ds, const SamplingDistribution& p, std::size_t total, Rng& rng) {
    if (p.probs.size() != static_cast<std::size_t>(ds.num_classes()))
        throw Error("resample_to_distribution: distribution has " + std::to_string(p.probs.size()) +
                    " entries for " + std::to_string(ds.num_classes()) + " classes");
    const auto counts = ds.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (p.probs[c] > 0.0 && counts[c] == 0)
            throw Error("resample_to_distribution: class " + std::to_string(c) + " has probability " +
                        std::to_string(p.probs[c]) + " but no rows");
    const auto targets = distribution_targets(p.probs, total);

    Builder out(ds);
    const auto groups = ds.indices_by_class();
    for (std::size_t c = 0; c < groups.size(); ++c) {
        if (targets[c] >= counts[c]) {
            for (std::size_t r : groups[c]) out.keep(r);
            duplicate_into(out, groups[c], targets[c] - counts[c], rng);
        } else {
            sample_without_replacement(out, groups[c], targets[c], rng);
        }
    }
    return out.finish(rng);
}

}  // namespace artlab
