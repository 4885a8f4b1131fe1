#pragma once
#include <vector>

#include "coref/resolver.hpp"

namespace coref {

constexpr double kProbFloor = 1e-12;

struct LossResult {
    double loss = 0.0;
    // Gradients on raw affinity scores, same jagged shape as A.raw,
    // already scaled by the 1/m mean factor.
    std::vector<std::vector<double>> draw;
    int n_anaphoric = 0;
};

// Class-weighted log-likelihood: alpha weights anaphoric terms, beta the
// epsilon terms; mean over all mentions. Probabilities are clamped to
// kProbFloor before the log; a clamped term contributes zero gradient.
LossResult coref_loss(const AffinityMatrix& A, const ClusterSet& gold,
                      double alpha, double beta);

// Detection hinge for enumerate-mode scorer training: target +1 for spans
// matching a gold mention, -1 otherwise; mean of max(0, 1 - t*score).
double span_hinge_loss(const std::vector<double>& scores,
                       const std::vector<bool>& is_gold,
                       std::vector<double>* dscores = nullptr);

} // namespace coref
