#pragma once

#include <optional>
#include <vector>

#include "hpnet/hierarchy.hpp"
#include "hpnet/taxonomy.hpp"

namespace hpnet {

// Flat fraction of exact top-1 hits.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

struct MistakeSeverity {
    // Mean height of the lowest common ancestor of the predicted and true
    // leaves, taken over misclassified samples only. Absent when there are
    // no mistakes; dividing by zero is not a severity of zero.
    std::optional<double> mean_height;
    int mistakes = 0;
};

MistakeSeverity mistake_severity(const std::vector<int>& pred, const std::vector<int>& truth,
                                 const Taxonomy& taxonomy);

// Mean over samples of the mean tree distance from the true class to each of
// the top-k predictions. A correct prediction contributes zero (D has a zero
// diagonal), so the metric rewards partial credit without excluding hits.
double hd_at_k(const std::vector<std::vector<int>>& topk, const std::vector<int>& truth,
               const ClassDistanceMatrix& dm);

struct EvalReport {
    double accuracy = 0.0;
    std::optional<double> mistake_severity;
    int mistake_count = 0;
    double hd_at_k = 0.0;
    int k = 1;
    int samples = 0;
};

// Scores ranked predictions against the taxonomy. Top-1 comes from the first
// column; the tree distances for hd@k come from the LCA-height encoding of
// the same taxonomy. All rows of topk must have the same width k >= 1.
EvalReport evaluate(const std::vector<std::vector<int>>& topk, const std::vector<int>& truth,
                    const Taxonomy& taxonomy);

}  // namespace hpnet
