#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace artlab {

struct SignificanceResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n_effective = 0;
    bool degenerate = false;  // zero-variance t-test or all-zero Wilcoxon differences
    bool exact = false;       // Wilcoxon p from the exact null distribution
};

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

// Two-sided paired t-test on a - b.
SignificanceResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Two-sided Wilcoxon signed-rank test on a - b. Zero differences are dropped and
// tied magnitudes get midranks. Up to 20 non-zero differences the p-value is
// exact over all sign assignments; beyond that a tie- and continuity-corrected
// normal approximation is used. `statistic` is min(W+, W-).
SignificanceResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

// scores[m][s]: score of method m on seed s. Per seed, methods are ranked by
// descending score (1 = best, ties share the midrank); returns the mean rank
// of each method over seeds.
std::vector<double> average_ranks(const std::vector<std::vector<double>>& scores);

// Midranks (1-based) of `values` in ascending order.
std::vector<double> midranks(std::span<const double> values);

double mean(std::span<const double> v);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_std(std::span<const double> v);

}  // namespace artlab
