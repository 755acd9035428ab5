#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "artlab/error.hpp"
#include "artlab/metrics.hpp"
#include "artlab/rng.hpp"
#include "artlab/stats.hpp"

using namespace artlab;

namespace oracle {

// Two-sided exact Wilcoxon p by enumerating all 2^n sign patterns of the
// (midranked) absolute differences and counting min(W+, W-) <= observed.
double wilcoxon_p(const std::vector<double>& a, const std::vector<double>& b, double* w_out = nullptr) {
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) d.push_back(a[i] - b[i]);
    const std::size_t n = d.size();
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        double less = 0, same = 0;
        for (std::size_t j = 0; j < n; ++j) {
            less += std::abs(d[j]) < std::abs(d[i]);
            same += std::abs(d[j]) == std::abs(d[i]);
        }
        rank[i] = 1 + less + (same - 1) / 2;
    }
    double wp = 0, wm = 0;
    for (std::size_t i = 0; i < n; ++i) (d[i] > 0 ? wp : wm) += rank[i];
    const double w = std::min(wp, wm);
    if (w_out) *w_out = w;
    std::size_t hits = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double p = 0, m = 0;
        for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1 ? p : m) += rank[i];
        hits += std::min(p, m) <= w + 1e-9;
    }
    return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

}  // namespace oracle

TEST_CASE("confusion") {
    const std::vector<Label> t{0, 0, 1}, p{0, 1, 1};
    const ConfusionMatrix cm = confusion(t, p, 2);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 0) == 0);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.total() == 3);
    CHECK(cm.trace() == 2);
    const ConfusionMatrix perfect = confusion(t, t, 2);
    CHECK(perfect.at(0, 1) + perfect.at(1, 0) == 0);
    const std::vector<Label> bad{0, 2, 1};
    CHECK_THROWS_AS(confusion(t, bad, 2), Error);
}

TEST_CASE("class_metrics") {
    ConfusionMatrix cm(2);
    cm.at(0, 0) = 2;
    cm.at(0, 1) = 1;
    cm.at(1, 0) = 1;
    cm.at(1, 1) = 1;
    const ClassMetrics m = class_metrics(cm);
    CHECK(m.precision[0] == doctest::Approx(2.0 / 3.0));
    CHECK(m.precision[1] == doctest::Approx(0.5));
    CHECK(m.recall[0] == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall[1] == doctest::Approx(0.5));
    CHECK(m.macro_f1 == doctest::Approx(7.0 / 12.0));
    CHECK(m.accuracy == doctest::Approx(0.6));

    ConfusionMatrix one(3);
    one.at(0, 0) = 1;
    one.at(0, 1) = 1;
    one.at(1, 0) = 1;
    const ClassMetrics o = class_metrics(one);
    CHECK(o.precision[0] == 0.5);
    CHECK(o.recall[0] == 0.5);
    CHECK(o.f1[0] == 0.5);
    CHECK(o.f1[2] == 0.0);  // zero-division convention

    ConfusionMatrix diag(3);
    for (int i = 0; i < 3; ++i) diag.at(i, i) = 4;
    CHECK(class_metrics(diag).macro_f1 == 1.0);
    CHECK(class_metrics(diag).accuracy == 1.0);
    CHECK_THROWS_AS(class_metrics(ConfusionMatrix(2)), Error);
}

TEST_CASE("macro-F1 matches a naive per-sample recomputation on 100 random matrices") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(5));
        std::vector<Label> t, p;
        const std::size_t n = 1 + rng.below(60);
        for (std::size_t i = 0; i < n; ++i) {
            t.push_back(static_cast<Label>(rng.below(static_cast<std::uint64_t>(k))));
            p.push_back(rng.uniform() < 0.5 ? t.back() : static_cast<Label>(rng.below(static_cast<std::uint64_t>(k))));
        }
        const ClassMetrics m = class_metrics(confusion(t, p, k));
        double f1_sum = 0, correct = 0;
        double f1_max = 0;
        for (int c = 0; c < k; ++c) {
            double tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                tp += t[i] == c && p[i] == c;
                fp += t[i] != c && p[i] == c;
                fn += t[i] == c && p[i] != c;
            }
            const double f1 = tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
            f1_sum += f1;
            f1_max = std::max(f1_max, f1);
        }
        for (std::size_t i = 0; i < n; ++i) correct += t[i] == p[i];
        CHECK(std::abs(m.macro_f1 - f1_sum / k) <= 1e-12);
        CHECK(std::abs(m.accuracy - correct / static_cast<double>(n)) <= 1e-12);
        CHECK(m.macro_f1 <= f1_max + 1e-15);
        for (double v : {m.macro_precision, m.macro_recall, m.macro_f1, m.accuracy}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("incomplete beta and t CDF against boost") {
    Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        const double a = 0.1 + 20 * rng.uniform(), b = 0.1 + 20 * rng.uniform(), x = rng.uniform();
        CHECK(std::abs(incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) < 1e-10);
    }
    for (double df : {1.0, 4.0, 19.0, 60.0})
        for (double t : {-4.0, -1.3, 0.0, 0.7, 2.093, 5.5}) {
            boost::math::students_t dist(df);
            CHECK(std::abs(student_t_cdf(t, df) - boost::math::cdf(dist, t)) < 1e-9);
        }
}

TEST_CASE("t CDF reference quantiles, df 19") {
    CHECK(std::abs((1 - student_t_cdf(1.729, 19)) - 0.05) < 5e-4);
    CHECK(std::abs((1 - student_t_cdf(2.093, 19)) - 0.025) < 5e-4);
    CHECK(std::abs((1 - student_t_cdf(2.861, 19)) - 0.005) < 5e-4);
}

TEST_CASE("paired_t_test") {
    const std::vector<double> d{1, -1, 1, -1}, z(4, 0.0);
    const auto r = paired_t_test(d, z);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(1.0));

    const std::vector<double> a{0.5, 1.5, 2.5};
    const auto same = paired_t_test(a, a);
    CHECK(same.degenerate);
    CHECK(same.p_value == 1.0);
    const std::vector<double> shifted{1.0, 2.0, 3.0};
    const auto shift = paired_t_test(shifted, a);
    CHECK(shift.degenerate);
    CHECK(shift.p_value == 0.0);

    // Oracle: hand formula with boost's t distribution.
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(20), y(20);
        for (std::size_t i = 0; i < 20; ++i) {
            x[i] = rng.normal();
            y[i] = rng.normal() + 0.3;
        }
        double m = 0, v = 0;
        for (std::size_t i = 0; i < 20; ++i) m += (x[i] - y[i]) / 20;
        for (std::size_t i = 0; i < 20; ++i) v += (x[i] - y[i] - m) * (x[i] - y[i] - m) / 19;
        const double t = m / std::sqrt(v / 20);
        const double p = 2 * boost::math::cdf(boost::math::complement(boost::math::students_t(19), std::abs(t)));
        const auto res = paired_t_test(x, y);
        CHECK(res.statistic == doctest::Approx(t).epsilon(1e-12));
        CHECK(std::abs(res.p_value - p) < 1e-8);
        CHECK(paired_t_test(y, x).p_value == doctest::Approx(res.p_value).epsilon(1e-12));
    }
    CHECK_THROWS_AS(paired_t_test(std::vector<double>{1}, std::vector<double>{2}), Error);
}

TEST_CASE("wilcoxon examples") {
    const std::vector<double> zero(5, 0.0), minus(5, -1.0);
    const auto r = wilcoxon_signed_rank(minus, zero);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(0.0625));
    CHECK(r.exact);
    const auto same = wilcoxon_signed_rank(zero, zero);
    CHECK(same.degenerate);
    CHECK(same.p_value == 1.0);
    CHECK(same.n_effective == 0);
}

TEST_CASE("exact wilcoxon equals brute-force enumeration on 200 random instances") {
    Rng rng(31337);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(10);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Small integer grid so zeros and ties are common.
            a[i] = static_cast<double>(rng.below(7));
            b[i] = static_cast<double>(rng.below(7));
        }
        const auto res = wilcoxon_signed_rank(a, b);
        if (res.n_effective == 0) {
            CHECK(res.degenerate);
            continue;
        }
        double w = 0;
        const double p = oracle::wilcoxon_p(a, b, &w);
        CHECK(res.exact);
        CHECK(res.statistic == w);
        CHECK(std::abs(res.p_value - p) <= 1e-12);
        CHECK(wilcoxon_signed_rank(b, a).p_value == res.p_value);
    }
}

TEST_CASE("wilcoxon normal approximation for large n") {
    // n = 30 without ties: compare against the textbook normal approximation.
    std::vector<double> a(30), b(30, 0.0);
    for (std::size_t i = 0; i < 30; ++i) a[i] = (i % 3 == 0 ? -1.0 : 1.0) * static_cast<double>(i + 1);
    const auto r = wilcoxon_signed_rank(a, b);
    CHECK_FALSE(r.exact);
    double wm = 0;
    for (std::size_t i = 0; i < 30; ++i)
        if (a[i] < 0) wm += static_cast<double>(i + 1);
    const double mu = 30.0 * 31 / 4, sd = std::sqrt(30.0 * 31 * 61 / 24);
    const double z = (std::abs(wm - mu) - 0.5) / sd;
    CHECK(r.statistic == wm);
    CHECK(r.p_value == doctest::Approx(std::erfc(z / std::sqrt(2.0))).epsilon(1e-12));
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
}

TEST_CASE("average_ranks") {
    const auto two = average_ranks({{0.9, 0.8}, {0.1, 0.2}});
    CHECK(two == std::vector<double>{1.0, 2.0});
    const auto tied = average_ranks({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
    for (double r : tied) CHECK(r == 2.5);
    const auto hand = average_ranks({{0.5, 0.3}, {0.4, 0.4}, {0.3, 0.5}});
    for (double r : hand) CHECK(r == 2.0);
    CHECK_THROWS_AS(average_ranks({{0.1}, {0.1, 0.2}}), Error);
}

TEST_CASE("mean and sample std") {
    const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    CHECK(mean(v) == 5.0);
    CHECK(sample_std(v) == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-14));
}
