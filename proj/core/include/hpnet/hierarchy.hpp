#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpnet/geometry.hpp"
#include "hpnet/taxonomy.hpp"

namespace hpnet {

// K x K nonnegative symmetric class-dissimilarity matrix over the leaf
// classes, in leaf_order. encoding_tag is "lcd" or "hcd".
struct ClassDistanceMatrix {
    Mat D;
    std::vector<std::string> labels;
    std::string encoding_tag;

    int size() const { return static_cast<int>(D.rows()); }

    // Symmetric, zero diagonal, strictly positive off-diagonal, finite.
    void validate() const;
};

// D[i,j] = height of the LCA of leaves i and j; integer entries in {1..h}.
ClassDistanceMatrix lcd_encode(const Taxonomy& t);

struct TreeEmbedConfig {
    int dim = 10;
    double curvature = 1.0;
    int epochs = 300;
    double lr = 0.05;
    int burn_in_epochs = 10;      // at lr * burn_in_factor
    double burn_in_factor = 0.1;  // 0.05 -> 0.005
    int negatives = 10;
    double init_radius = 1e-3;
    std::uint64_t seed = 1;
};

struct NodeEmbedding {
    Mat points;  // node_count x dim, row per taxonomy node id
    double curvature = 1.0;
    std::vector<std::string> labels;
};

struct TreeEmbedResult {
    ClassDistanceMatrix matrix;
    NodeEmbedding embedding;
    double final_objective = 0.0;
    double initial_objective = 0.0;
    bool converged = true;  // final objective improved on the first epoch
};

// Embeds every tree node in the Poincare ball with a contrastive objective
// (edges attract, sampled non-edges repel), optimized by per-edge Riemannian
// SGD steps, then reads off pairwise leaf distances.
TreeEmbedResult hcd_encode(const Taxonomy& t, const TreeEmbedConfig& config = {});

}  // namespace hpnet
