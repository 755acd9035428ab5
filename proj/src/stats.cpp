#include "artlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "artlab/error.hpp"

namespace artlab {

namespace {

double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw Error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw Error("incomplete_beta: a and b must be positive");
    if (x < 0.0 || x > 1.0) throw Error("incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw Error("student_t_cdf: df must be positive");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    return t > 0.0 ? 1.0 - tail : tail;
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

SignificanceResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("paired_t_test: samples differ in length");
    if (a.size() < 2) throw Error("paired_t_test: need at least two pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double md = mean(d);
    const double sd = sample_std(d);
    const double n = static_cast<double>(d.size());
    SignificanceResult r;
    r.n_effective = d.size();
    if (sd == 0.0) {
        r.degenerate = true;
        if (md == 0.0) {
            r.statistic = 0.0;
            r.p_value = 1.0;
        } else {
            r.statistic = md > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        }
        return r;
    }
    r.statistic = md / (sd / std::sqrt(n));
    const double df = n - 1.0;
    r.p_value = std::clamp(incomplete_beta(0.5 * df, 0.5, df / (df + r.statistic * r.statistic)), 0.0, 1.0);
    return r;
}

std::vector<double> midranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

SignificanceResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("wilcoxon_signed_rank: samples differ in length");
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);

    SignificanceResult r;
    r.n_effective = d.size();
    if (d.empty()) {
        r.degenerate = true;
        r.p_value = 1.0;
        return r;
    }
    std::vector<double> mags(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) mags[i] = std::abs(d[i]);
    const auto ranks = midranks(mags);

    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? w_plus : w_minus) += ranks[i];
    const double w = std::min(w_plus, w_minus);
    r.statistic = w;
    const std::size_t n = d.size();

    if (n <= 20) {
        // Midranks are multiples of 1/2, so doubled ranks are integers and the
        // null distribution of 2 W+ over all 2^n sign patterns is a subset-sum count.
        std::vector<std::size_t> doubled(n);
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
            total += doubled[i];
        }
        std::vector<double> ways(total + 1, 0.0);
        ways[0] = 1.0;
        for (std::size_t rk : doubled)
            for (std::size_t s = total; s >= rk; --s) {
                ways[s] += ways[s - rk];
                if (s == rk) break;
            }
        const auto limit = static_cast<std::size_t>(std::llround(2.0 * w));
        double at_or_below = 0.0;
        for (std::size_t s = 0; s <= limit && s <= total; ++s) at_or_below += ways[s];
        r.p_value = std::min(1.0, 2.0 * at_or_below / std::ldexp(1.0, static_cast<int>(n)));
        r.exact = true;
        return r;
    }

    const double nd = static_cast<double>(n);
    const double mu = nd * (nd + 1.0) / 4.0;
    double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0;
    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        var -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    if (var <= 0.0) {
        r.degenerate = true;
        r.p_value = 1.0;
        return r;
    }
    const double z = std::max(0.0, std::abs(w - mu) - 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return r;
}

std::vector<double> average_ranks(const std::vector<std::vector<double>>& scores) {
    if (scores.empty()) return {};
    const std::size_t seeds = scores.front().size();
    for (const auto& s : scores)
        if (s.size() != seeds) throw Error("average_ranks: methods have different seed counts");
    std::vector<double> total(scores.size(), 0.0);
    std::vector<double> column(scores.size());
    for (std::size_t s = 0; s < seeds; ++s) {
        for (std::size_t m = 0; m < scores.size(); ++m) column[m] = -scores[m][s];
        const auto ranks = midranks(column);
        for (std::size_t m = 0; m < scores.size(); ++m) total[m] += ranks[m];
    }
    if (seeds > 0)
        for (double& t : total) t /= static_cast<double>(seeds);
    return total;
}

}  // namespace artlab
