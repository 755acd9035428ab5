#pragma once

#include <span>
#include <vector>

namespace artlab {

// A point on the probability simplex over the K classes.
struct SamplingDistribution {
    std::vector<double> probs;
};

// Throws unless every entry is finite and >= 0 and the entries sum to 1 within `tol`.
void require_simplex(std::span<const double> p, const char* what, double tol = 1e-9);

}  // namespace artlab
