#pragma once

#include <cstdint>
#include <vector>

#include "hpnet/classifier.hpp"
#include "hpnet/taxonomy.hpp"

namespace hpnet {

// Balanced labeled tree with Gaussian clusters whose means follow the tree:
// each node's center is its parent's center plus noise that shrinks with
// depth, so classes under one subtree stay closer to each other than to the
// rest. That makes hierarchy-aware training measurable.
struct SyntheticConfig {
    std::vector<int> branching = {3, 2, 2};  // children per node, per level
    int feature_dim = 8;
    int train_per_class = 40;
    int test_per_class = 20;
    double center_scale = 4.0;   // sigma of the first-level centers
    double center_shrink = 0.5;  // per-level multiplier on center noise
    double sample_noise = 0.5;   // sigma of samples around their leaf center
    std::uint64_t seed = 1;

    void validate() const;
};

struct SyntheticDataset {
    Taxonomy taxonomy;
    Mat centers;  // leaf_count x feature_dim, rows in leaf order
    FeatureBatch train;
    FeatureBatch test;
};

SyntheticDataset make_synthetic(const SyntheticConfig& config);

}  // namespace hpnet
