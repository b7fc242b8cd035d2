#include "hpnet/hierarchy.hpp"

#include <cmath>
#include <set>

#include "hpnet/geometry_grad.hpp"
#include "hpnet/rng.hpp"

namespace hpnet {

void ClassDistanceMatrix::validate() const {
    const int k = size();
    if (D.cols() != k) throw DataError("class distance matrix is not square");
    if (static_cast<int>(labels.size()) != k) {
        throw DataError("class distance matrix has " + std::to_string(k) + " rows but "
                        + std::to_string(labels.size()) + " labels");
    }
    if (!D.allFinite()) throw DataError("class distance matrix has non-finite entries");
    for (int i = 0; i < k; ++i) {
        if (D(i, i) != 0.0) throw DataError("class distance matrix has a nonzero diagonal");
        for (int j = i + 1; j < k; ++j) {
            if (D(i, j) != D(j, i)) throw DataError("class distance matrix is not symmetric");
            if (!(D(i, j) > 0.0)) {
                throw DataError("class distance matrix entry (" + std::to_string(i) + ","
                                + std::to_string(j) + ") is not positive");
            }
        }
    }
}

ClassDistanceMatrix lcd_encode(const Taxonomy& t) {
    const int k = t.leaf_count();
    ClassDistanceMatrix out;
    out.encoding_tag = "lcd";
    out.labels = t.leaf_labels();
    out.D = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            double d = static_cast<double>(t.height(t.lca(t.leaf(i), t.leaf(j))));
            out.D(i, j) = d;
            out.D(j, i) = d;
        }
    }
    return out;
}

namespace {

// Uniform sample inside the ball of the given radius.
Vec sample_in_ball(Rng& rng, int dim, double radius) {
    Vec dir(dim);
    for (int i = 0; i < dim; ++i) dir[i] = rng.normal();
    double n = dir.norm();
    if (n == 0.0) return Vec::Zero(dim);
    double r = radius * std::pow(rng.uniform01(), 1.0 / dim);
    return (r / n) * dir;
}

}  // namespace

TreeEmbedResult hcd_encode(const Taxonomy& t, const TreeEmbedConfig& config) {
    if (config.dim < 1) throw ConfigError("hcd: embedding dimension must be >= 1");
    if (config.negatives < 1) throw ConfigError("hcd: need at least one negative sample");
    const double c = Curvature(config.curvature).value();
    const int n = t.node_count();

    // adjacency = tree edges, both directions
    std::vector<std::set<int>> adjacent(n);
    std::vector<std::pair<int, int>> edges;  // (child, parent)
    for (int v = 1; v < n; ++v) {
        int p = t.parent(v);
        adjacent[v].insert(p);
        adjacent[p].insert(v);
        edges.emplace_back(v, p);
    }
    if (edges.empty()) throw DataError("hcd: tree has a single node, nothing to embed");

    Rng rng(derive_seed(config.seed, "hcd_encode"));
    Mat points(n, config.dim);
    for (int v = 0; v < n; ++v) {
        points.row(v) = sample_in_ball(rng, config.dim, config.init_radius).transpose();
    }

    const int negs = config.negatives;
    std::vector<int> edge_order(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) edge_order[i] = static_cast<int>(i);

    std::vector<int> neg_nodes(negs);
    std::vector<double> neg_dist(negs);
    double first_epoch_loss = 0.0;
    double last_epoch_loss = 0.0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr =
            epoch < config.burn_in_epochs ? config.lr * config.burn_in_factor : config.lr;
        rng.shuffle(edge_order);
        double epoch_loss = 0.0;

        for (int ei : edge_order) {
            const auto [u, v] = edges[ei];
            Vec xu = points.row(u).transpose();
            Vec xv = points.row(v).transpose();

            // negatives: nodes not adjacent to u and distinct from it
            for (int k = 0; k < negs; ++k) {
                int cand;
                do {
                    cand = static_cast<int>(rng.uniform_index(n));
                } while (cand == u || adjacent[u].count(cand));
                neg_nodes[k] = cand;
            }

            const double d_pos = distance_raw(xu, xv, c);
            double max_neg_logit = -d_pos;
            for (int k = 0; k < negs; ++k) {
                neg_dist[k] = distance_raw(xu, points.row(neg_nodes[k]).transpose(), c);
                max_neg_logit = std::max(max_neg_logit, -neg_dist[k]);
            }
            // loss = d_pos + log(exp(-d_pos) + sum_k exp(-d_k)), stabilized
            double z = std::exp(-d_pos - max_neg_logit);
            double sum = z;
            for (int k = 0; k < negs; ++k) sum += std::exp(-neg_dist[k] - max_neg_logit);
            epoch_loss += d_pos + max_neg_logit + std::log(sum);

            const double p_pos = z / sum;
            // dL/dd_pos = 1 - p_pos ; dL/dd_k = -p_k
            Vec gu = Vec::Zero(config.dim);
            {
                DistGrads dg = distance_vjp(xu, xv, c, 1.0 - p_pos);
                gu += dg.gx;
                riemannian_step_inplace(xv, dg.gy, lr, c);
                points.row(v) = xv.transpose();
            }
            for (int k = 0; k < negs; ++k) {
                Vec xn = points.row(neg_nodes[k]).transpose();
                const double p_k = std::exp(-neg_dist[k] - max_neg_logit) / sum;
                DistGrads dg = distance_vjp(xu, xn, c, -p_k);
                gu += dg.gx;
                riemannian_step_inplace(xn, dg.gy, lr, c);
                points.row(neg_nodes[k]) = xn.transpose();
            }
            riemannian_step_inplace(xu, gu, lr, c);
            points.row(u) = xu.transpose();
        }

        epoch_loss /= static_cast<double>(edges.size());
        if (epoch == 0) first_epoch_loss = epoch_loss;
        last_epoch_loss = epoch_loss;
    }

    TreeEmbedResult out;
    out.embedding.points = points;
    out.embedding.curvature = c;
    out.embedding.labels.reserve(n);
    for (int v = 0; v < n; ++v) out.embedding.labels.push_back(t.label(v));

    const int k = t.leaf_count();
    out.matrix.encoding_tag = "hcd";
    out.matrix.labels = t.leaf_labels();
    out.matrix.D = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            double d = distance_raw(points.row(t.leaf(i)).transpose(),
                                    points.row(t.leaf(j)).transpose(), c);
            out.matrix.D(i, j) = d;
            out.matrix.D(j, i) = d;
        }
    }
    out.final_objective = last_epoch_loss;
    out.initial_objective = first_epoch_loss;
    out.converged = config.epochs < 2 || last_epoch_loss < first_epoch_loss;
    return out;
}

}  // namespace hpnet
