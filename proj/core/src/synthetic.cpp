#include "hpnet/synthetic.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>

#include "hpnet/errors.hpp"
#include "hpnet/rng.hpp"

namespace hpnet {

void SyntheticConfig::validate() const {
    if (branching.empty()) throw ConfigError("branching list is empty");
    long long k = 1;
    for (int b : branching) {
        if (b < 1) throw ConfigError("branching factors must be positive");
        k *= b;
        if (k > 4096) throw ConfigError("synthetic tree would have more than 4096 leaves");
    }
    if (k < 2) throw ConfigError("synthetic tree needs at least 2 leaves");
    if (feature_dim < 1) throw ConfigError("feature dimension must be positive");
    if (train_per_class < 1 || test_per_class < 1) {
        throw ConfigError("per-class sample counts must be positive");
    }
    if (!(center_scale > 0.0) || !(center_shrink > 0.0) || !(sample_noise > 0.0)) {
        throw ConfigError("noise scales must be positive");
    }
}

namespace {

void write_subtree(std::ostringstream& out, const std::vector<int>& branching,
                   const std::string& name, int depth) {
    for (int t = 0; t < depth; ++t) out << '\t';
    out << name << '\n';
    if (depth == static_cast<int>(branching.size())) return;
    for (int j = 0; j < branching[static_cast<std::size_t>(depth)]; ++j) {
        write_subtree(out, branching, name == "root" ? "n" + std::to_string(j)
                                                     : name + "_" + std::to_string(j),
                      depth + 1);
    }
}

Vec draw_normal(Rng& rng, int dim) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.normal();
    return v;
}

FeatureBatch draw_samples(Rng& rng, const Mat& centers, double noise, int per_class) {
    const int K = static_cast<int>(centers.rows());
    const int p = static_cast<int>(centers.cols());
    FeatureBatch batch;
    batch.X = Mat(K * per_class, p);
    batch.y.resize(static_cast<std::size_t>(K * per_class));
    int row = 0;
    for (int k = 0; k < K; ++k) {
        for (int s = 0; s < per_class; ++s, ++row) {
            batch.X.row(row) = centers.row(k) + noise * draw_normal(rng, p).transpose();
            batch.y[static_cast<std::size_t>(row)] = k;
        }
    }
    return batch;
}

}  // namespace

SyntheticDataset make_synthetic(const SyntheticConfig& config) {
    config.validate();

    std::ostringstream text;
    write_subtree(text, config.branching, "root", 0);
    std::istringstream in(text.str());

    SyntheticDataset ds{Taxonomy::parse_indented(in), {}, {}, {}};

    // Node ids follow the indented text, parents before children, so one pass
    // in id order fills every center from its parent's.
    const int n = ds.taxonomy.node_count();
    const int p = config.feature_dim;
    Mat node_centers(n, p);
    node_centers.row(0).setZero();
    Rng rng(derive_seed(config.seed, "synthetic_centers"));
    for (int v = 1; v < n; ++v) {
        const double sigma =
            config.center_scale *
            std::pow(config.center_shrink, static_cast<double>(ds.taxonomy.depth(v) - 1));
        node_centers.row(v) =
            node_centers.row(ds.taxonomy.parent(v)) + sigma * draw_normal(rng, p).transpose();
    }

    const int K = ds.taxonomy.leaf_count();
    ds.centers = Mat(K, p);
    for (int k = 0; k < K; ++k) ds.centers.row(k) = node_centers.row(ds.taxonomy.leaf(k));

    Rng train_rng(derive_seed(config.seed, "synthetic_train"));
    ds.train = draw_samples(train_rng, ds.centers, config.sample_noise, config.train_per_class);
    Rng test_rng(derive_seed(config.seed, "synthetic_test"));
    ds.test = draw_samples(test_rng, ds.centers, config.sample_noise, config.test_per_class);
    return ds;
}

}  // namespace hpnet
