#include "hpnet/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "hpnet/geometry_grad.hpp"
#include "hpnet/rng.hpp"

namespace hpnet {

void FeatureBatch::validate(int num_classes) const {
    if (X.rows() == 0) throw DataError("feature batch is empty");
    if (static_cast<int>(y.size()) != X.rows()) {
        throw DataError("feature batch has " + std::to_string(X.rows()) + " rows but " +
                        std::to_string(y.size()) + " labels");
    }
    if (!X.allFinite()) throw DataError("feature batch contains non-finite values");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] >= num_classes) {
            throw DataError("sample " + std::to_string(i) + " has class index " +
                            std::to_string(y[i]) + ", valid range is [0, " +
                            std::to_string(num_classes) + ")");
        }
    }
}

std::string to_string(HierarchyMode m) {
    switch (m) {
        case HierarchyMode::None: return "none";
        case HierarchyMode::Lcd: return "lcd";
        case HierarchyMode::Hcd: return "hcd";
    }
    throw ConfigError("unknown hierarchy mode");
}

HierarchyMode hierarchy_mode_from_string(const std::string& s) {
    if (s == "none") return HierarchyMode::None;
    if (s == "lcd") return HierarchyMode::Lcd;
    if (s == "hcd") return HierarchyMode::Hcd;
    throw ConfigError("unknown hierarchy mode '" + s + "', expected none, lcd or hcd");
}

void HyperbolicHead::validate() const {
    if (W.rows() == 0 || W.cols() == 0) throw ConfigError("head weight matrix is empty");
    if (b.size() != W.cols()) {
        throw ConfigError("head bias has dimension " + std::to_string(b.size()) +
                          ", expected " + std::to_string(W.cols()));
    }
    if (!W.allFinite() || !b.allFinite()) throw NumericalError("head parameters are non-finite");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ConfigError("temperature must be positive and finite");
    }
    if (mode == SpaceMode::Hyperbolic) {
        Curvature c(curvature);
        if (c.sqrt() * b.norm() > 1.0 - kBallEps) {
            throw DataError("head bias violates the ball invariant");
        }
    }
}

///////////////////////////////////////////////////////////////////////////////
// Backbone
///////////////////////////////////////////////////////////////////////////////

TinyBackbone TinyBackbone::init(int in_dim, int hidden_dim, int out_dim, std::uint64_t seed) {
    if (in_dim < 1 || hidden_dim < 1 || out_dim < 1) {
        throw ConfigError("backbone dimensions must be positive");
    }
    Rng rng(derive_seed(seed, "backbone_init"));
    TinyBackbone bb;
    bb.W1 = Mat(hidden_dim, in_dim);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (int r = 0; r < hidden_dim; ++r)
        for (int c = 0; c < in_dim; ++c) bb.W1(r, c) = s1 * rng.normal();
    bb.b1 = Vec::Zero(hidden_dim);
    bb.W2 = Mat(out_dim, hidden_dim);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (int r = 0; r < out_dim; ++r)
        for (int c = 0; c < hidden_dim; ++c) bb.W2(r, c) = s2 * rng.normal();
    bb.b2 = Vec::Zero(out_dim);
    return bb;
}

Mat TinyBackbone::forward(const Mat& X) const {
    if (X.cols() != in_dim()) {
        throw DataError("backbone expects " + std::to_string(in_dim()) + " input features, got " +
                        std::to_string(X.cols()));
    }
    Mat H = (((X * W1.transpose()).rowwise() + b1.transpose()).array().tanh()).matrix();
    return (H * W2.transpose()).rowwise() + b2.transpose();
}

BackboneGrads backbone_gradients(const TinyBackbone& bb, const Mat& X, const Mat& gFeatures) {
    if (gFeatures.rows() != X.rows() || gFeatures.cols() != bb.out_dim()) {
        throw DataError("backbone gradient shape mismatch");
    }
    Mat H = (((X * bb.W1.transpose()).rowwise() + bb.b1.transpose()).array().tanh()).matrix();
    BackboneGrads g;
    g.gW2 = gFeatures.transpose() * H;
    g.gb2 = gFeatures.colwise().sum().transpose();
    Mat gH = gFeatures * bb.W2;
    Mat gPre = (gH.array() * (1.0 - H.array().square())).matrix();
    g.gW1 = gPre.transpose() * X;
    g.gb1 = gPre.colwise().sum().transpose();
    return g;
}

///////////////////////////////////////////////////////////////////////////////
// Forward path
///////////////////////////////////////////////////////////////////////////////

namespace {

// Intermediates of the hyperbolic pipeline for one sample; backward reuses
// the same post-projection values the forward produced.
struct EmbedTrace {
    Vec e;  // exp-map of the feature at the origin
    Vec t;  // e (+)_c b
    Vec z;  // Mobius matvec by W
};

EmbedTrace embed_one(const HyperbolicHead& head, const Vec& f) {
    const double c = head.curvature;
    EmbedTrace tr;
    tr.e = exp_map_origin_raw(f, c);
    project_to_ball_inplace(tr.e, c);
    tr.t = mobius_add_raw(tr.e, head.b, c);
    project_to_ball_inplace(tr.t, c);
    tr.z = mobius_matvec_raw(head.W, tr.t, c);
    project_to_ball_inplace(tr.z, c);
    return tr;
}

void require_compatible(const HyperbolicHead& head, const PrototypeSet& protos,
                        const Mat& features) {
    if (features.cols() != head.in_dim()) {
        throw DataError("features have dimension " + std::to_string(features.cols()) +
                        ", head expects " + std::to_string(head.in_dim()));
    }
    if (head.out_dim() != protos.dim()) {
        throw ConfigError("head embeds into dimension " + std::to_string(head.out_dim()) +
                          " but prototypes live in dimension " + std::to_string(protos.dim()));
    }
    if (head.mode != protos.mode) {
        throw ConfigError("head mode " + to_string(head.mode) + " does not match prototype mode " +
                          to_string(protos.mode));
    }
    if (head.mode == SpaceMode::Hyperbolic && head.curvature != protos.curvature) {
        throw ConfigError("head curvature " + std::to_string(head.curvature) +
                          " does not match prototype curvature " +
                          std::to_string(protos.curvature));
    }
}

}  // namespace

Mat embed(const HyperbolicHead& head, const Mat& features) {
    if (features.cols() != head.in_dim()) {
        throw DataError("features have dimension " + std::to_string(features.cols()) +
                        ", head expects " + std::to_string(head.in_dim()));
    }
    const int m = static_cast<int>(features.rows());
    if (head.mode == SpaceMode::Euclidean) {
        return (features.rowwise() + head.b.transpose()) * head.W.transpose();
    }
    Mat Z(m, head.out_dim());
    for (int i = 0; i < m; ++i) {
        Z.row(i) = embed_one(head, features.row(i).transpose()).z.transpose();
    }
    return Z;
}

Mat sample_prototype_distances(const HyperbolicHead& head, const PrototypeSet& protos,
                               const Mat& features) {
    require_compatible(head, protos, features);
    const Mat Z = embed(head, features);
    const int m = static_cast<int>(Z.rows());
    const int K = protos.size();
    Mat D(m, K);
    for (int i = 0; i < m; ++i) {
        const Vec z = Z.row(i).transpose();
        for (int k = 0; k < K; ++k) {
            const Vec a = protos.points.row(k).transpose();
            D(i, k) = head.mode == SpaceMode::Hyperbolic ? distance_raw(z, a, head.curvature)
                                                         : (z - a).norm();
        }
    }
    return D;
}

Mat predict_proba(const HyperbolicHead& head, const PrototypeSet& protos, const Mat& features) {
    const Mat D = sample_prototype_distances(head, protos, features);
    const double invT = 1.0 / head.temperature;
    Mat P(D.rows(), D.cols());
    for (int i = 0; i < D.rows(); ++i) {
        // softmax of -d/T, shifted by the row max for stability
        const Vec logits = -invT * D.row(i).transpose();
        const double mx = logits.maxCoeff();
        Vec e = (logits.array() - mx).exp();
        P.row(i) = (e / e.sum()).transpose();
    }
    return P;
}

double dce_loss(const HyperbolicHead& head, const PrototypeSet& protos,
                const FeatureBatch& batch) {
    batch.validate(protos.size());
    const Mat D = sample_prototype_distances(head, protos, batch.X);
    const double invT = 1.0 / head.temperature;
    double total = 0.0;
    for (int i = 0; i < D.rows(); ++i) {
        const Vec logits = -invT * D.row(i).transpose();
        const double mx = logits.maxCoeff();
        const double lse = mx + std::log((logits.array() - mx).exp().sum());
        total += invT * D(i, batch.y[static_cast<std::size_t>(i)]) + lse;
    }
    return total / static_cast<double>(D.rows());
}

double total_loss(const HyperbolicHead& head, const PrototypeSet& protos,
                  const FeatureBatch& batch, const ClassDistanceMatrix& dm, double weight) {
    return dce_loss(head, protos, batch) + weight * disto_loss(protos, dm);
}

std::vector<std::vector<int>> predict_topk(const HyperbolicHead& head, const PrototypeSet& protos,
                                           const Mat& features, int k) {
    if (k < 1 || k > protos.size()) {
        throw ConfigError("top-k of " + std::to_string(k) + " is out of range [1, " +
                          std::to_string(protos.size()) + "]");
    }
    const Mat D = sample_prototype_distances(head, protos, features);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(D.rows()));
    std::vector<int> idx(static_cast<std::size_t>(protos.size()));
    for (int i = 0; i < D.rows(); ++i) {
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            if (D(i, a) != D(i, b)) return D(i, a) < D(i, b);
            return a < b;
        });
        out[static_cast<std::size_t>(i)].assign(idx.begin(), idx.begin() + k);
    }
    return out;
}

std::vector<int> predict_top1(const HyperbolicHead& head, const PrototypeSet& protos,
                              const Mat& features) {
    auto topk = predict_topk(head, protos, features, 1);
    std::vector<int> out(topk.size());
    for (std::size_t i = 0; i < topk.size(); ++i) out[i] = topk[i][0];
    return out;
}

///////////////////////////////////////////////////////////////////////////////
// Analytic gradients
///////////////////////////////////////////////////////////////////////////////

DceGrads dce_loss_gradients(const HyperbolicHead& head, const PrototypeSet& protos,
                            const Mat& features, const std::vector<int>& y,
                            bool need_feature_grads) {
    require_compatible(head, protos, features);
    const int m = static_cast<int>(features.rows());
    const int K = protos.size();
    if (static_cast<int>(y.size()) != m) throw DataError("label count does not match batch size");
    for (int v : y) {
        if (v < 0 || v >= K) throw DataError("class index " + std::to_string(v) + " out of range");
    }

    const double c = head.curvature;
    const double invT = 1.0 / head.temperature;
    const double invm = 1.0 / static_cast<double>(m);

    DceGrads out;
    out.gW = Mat::Zero(head.out_dim(), head.in_dim());
    out.gb = Vec::Zero(head.in_dim());
    out.gProto = Mat::Zero(K, protos.dim());
    if (need_feature_grads) out.gFeatures = Mat::Zero(m, head.in_dim());

    Vec d(K);
    for (int i = 0; i < m; ++i) {
        const Vec f = features.row(i).transpose();

        EmbedTrace tr;
        Vec u;  // euclidean-mode pre-product f + b
        Vec z;
        if (head.mode == SpaceMode::Hyperbolic) {
            tr = embed_one(head, f);
            z = tr.z;
            for (int k = 0; k < K; ++k) {
                d(k) = distance_raw(z, protos.points.row(k).transpose(), c);
            }
        } else {
            u = f + head.b;
            z = head.W * u;
            for (int k = 0; k < K; ++k) {
                d(k) = (z - protos.points.row(k).transpose()).norm();
            }
        }

        const Vec logits = -invT * d;
        const double mx = logits.maxCoeff();
        const Vec e = (logits.array() - mx).exp();
        const double lse = mx + std::log(e.sum());
        out.loss += (invT * d(y[static_cast<std::size_t>(i)]) + lse) * invm;
        const Vec p = e / e.sum();

        // dL/dd_k = (1{k = y} - p_k) / T, averaged over the batch
        Vec gz = Vec::Zero(head.out_dim());
        for (int k = 0; k < K; ++k) {
            const double gd =
                ((k == y[static_cast<std::size_t>(i)] ? 1.0 : 0.0) - p(k)) * invT * invm;
            if (gd == 0.0) continue;
            const Vec a = protos.points.row(k).transpose();
            const DistGrads dg = head.mode == SpaceMode::Hyperbolic
                                     ? distance_vjp(z, a, c, gd)
                                     : euclidean_distance_vjp(z, a, gd);
            gz += dg.gx;
            out.gProto.row(k) += dg.gy.transpose();
        }

        if (head.mode == SpaceMode::Hyperbolic) {
            const MatvecGrads mg = mobius_matvec_vjp(head.W, tr.t, c, gz);
            out.gW += mg.gM;
            const AddGrads ag = mobius_add_vjp(tr.e, head.b, c, mg.gx);
            out.gb += ag.gy;
            if (need_feature_grads) {
                out.gFeatures.row(i) = exp_map_origin_vjp(f, c, ag.gx).transpose();
            }
        } else {
            out.gW += gz * u.transpose();
            const Vec gu = head.W.transpose() * gz;
            out.gb += gu;
            if (need_feature_grads) out.gFeatures.row(i) = gu.transpose();
        }
    }
    return out;
}

///////////////////////////////////////////////////////////////////////////////
// Joint training
///////////////////////////////////////////////////////////////////////////////

void TrainConfig::validate() const {
    if (mode == SpaceMode::Hyperbolic) Curvature check(curvature);
    if (proto_dim < 1) throw ConfigError("prototype dimension must be positive");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ConfigError("temperature must be positive and finite");
    }
    if (!(disto_weight >= 0.0) || !std::isfinite(disto_weight)) {
        throw ConfigError("distortion weight must be nonnegative and finite");
    }
    if (epochs < 0) throw ConfigError("epochs must be nonnegative");
    if (batch_size < 1) throw ConfigError("batch size must be positive");
    if (!(lr > 0.0) || !(proto_lr > 0.0)) throw ConfigError("learning rates must be positive");
    if (backbone_hidden < 0 || backbone_out < 0) {
        throw ConfigError("backbone dimensions must be nonnegative");
    }
}

Mat Model::features_of(const Mat& raw) const {
    return backbone ? backbone->forward(raw) : raw;
}

std::vector<int> Model::predict(const Mat& raw) const {
    return predict_top1(head, prototypes, features_of(raw));
}

std::vector<std::vector<int>> Model::predict_topk_raw(const Mat& raw, int k) const {
    return predict_topk(head, prototypes, features_of(raw), k);
}

Mat Model::predict_proba_raw(const Mat& raw) const {
    return predict_proba(head, prototypes, features_of(raw));
}

TrainResult train(const TrainConfig& config, const FeatureBatch& data,
                  const std::vector<std::string>& class_labels,
                  const std::optional<ClassDistanceMatrix>& target, std::uint64_t leaf_digest) {
    config.validate();
    const int K = static_cast<int>(class_labels.size());
    if (K < 2) throw ConfigError("training needs at least 2 classes");
    data.validate(K);

    const bool use_disto = config.hierarchy != HierarchyMode::None;
    if (use_disto) {
        if (!target) {
            throw ConfigError("hierarchy encoding '" + to_string(config.hierarchy) +
                              "' requires a class distance matrix");
        }
        target->validate();
        if (target->labels != class_labels) {
            throw DataError("class distance matrix labels do not match the training classes");
        }
        if (target->size() != K) {
            throw DataError("class distance matrix covers " + std::to_string(target->size()) +
                            " classes, expected " + std::to_string(K));
        }
    }

    const int in_dim = data.feature_dim();

    TrainResult result;
    Model& model = result.model;
    model.mode = config.mode;
    model.hierarchy = config.hierarchy;
    model.disto_weight = config.disto_weight;
    model.labels = class_labels;
    model.leaf_digest = leaf_digest;
    if (use_disto) model.target = *target;

    int feat_dim = in_dim;
    if (config.backbone_hidden > 0) {
        const int out = config.backbone_out > 0 ? config.backbone_out : in_dim;
        model.backbone = TinyBackbone::init(in_dim, config.backbone_hidden, out, config.seed);
        feat_dim = out;
    }

    HyperbolicHead& head = model.head;
    head.mode = config.mode;
    head.curvature = config.curvature;
    head.temperature = config.temperature;
    {
        Rng rng(derive_seed(config.seed, "head_init"));
        head.W = Mat(config.proto_dim, feat_dim);
        const double s = 1.0 / std::sqrt(static_cast<double>(feat_dim));
        for (int r = 0; r < config.proto_dim; ++r)
            for (int col = 0; col < feat_dim; ++col) head.W(r, col) = s * rng.normal();
    }
    head.b = Vec::Zero(feat_dim);

    PrototypeSet& protos = model.prototypes;
    protos.mode = config.mode;
    protos.curvature = config.mode == SpaceMode::Hyperbolic ? config.curvature : 0.0;
    protos.labels = class_labels;
    protos.points = init_prototypes(K, config.proto_dim, config.mode, config.curvature,
                                    config.seed);

    const int m = data.size();
    const double c = config.curvature;
    // Batch order is seeded independently of the hierarchy mode, so paired
    // runs (lcd vs none, same seed) see identical initialization and batches.
    Rng shuffler(derive_seed(config.seed, "batch_order"));
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffler.shuffle(order);
        for (int start = 0; start < m; start += config.batch_size) {
            const int bs = std::min(config.batch_size, m - start);
            Mat Xraw(bs, in_dim);
            std::vector<int> yb(static_cast<std::size_t>(bs));
            for (int r = 0; r < bs; ++r) {
                const int src = order[static_cast<std::size_t>(start + r)];
                Xraw.row(r) = data.X.row(src);
                yb[static_cast<std::size_t>(r)] = data.y[static_cast<std::size_t>(src)];
            }
            const Mat F = model.backbone ? model.backbone->forward(Xraw) : Xraw;

            DceGrads g = dce_loss_gradients(head, protos, F, yb, model.backbone.has_value());
            Mat gProto = std::move(g.gProto);
            if (use_disto && config.disto_weight > 0.0) {
                gProto += config.disto_weight * disto_loss_grad(protos, *target);
            }

            head.W -= config.lr * g.gW;
            if (model.backbone) {
                const BackboneGrads bg = backbone_gradients(*model.backbone, Xraw, g.gFeatures);
                model.backbone->W1 -= config.lr * bg.gW1;
                model.backbone->b1 -= config.lr * bg.gb1;
                model.backbone->W2 -= config.lr * bg.gW2;
                model.backbone->b2 -= config.lr * bg.gb2;
            }

            if (config.mode == SpaceMode::Hyperbolic) {
                riemannian_step_inplace(head.b, g.gb, config.proto_lr, c);
                for (int k = 0; k < K; ++k) {
                    Vec row = protos.points.row(k).transpose();
                    riemannian_step_inplace(row, gProto.row(k).transpose(), config.proto_lr, c);
                    protos.points.row(k) = row.transpose();
                }
            } else {
                head.b -= config.proto_lr * g.gb;
                protos.points -= config.proto_lr * gProto;
            }
        }

        // Full-pass evaluation at the end of the epoch.
        const Mat F = model.backbone ? model.backbone->forward(data.X) : data.X;
        EpochRecord rec;
        rec.epoch = epoch;
        rec.dce = dce_loss(head, protos, FeatureBatch{F, data.y});
        rec.disto = use_disto ? disto_loss(protos, *target) : 0.0;
        rec.total = rec.dce + config.disto_weight * rec.disto;
        const std::vector<int> pred = predict_top1(head, protos, F);
        int hits = 0;
        for (int i = 0; i < m; ++i) {
            if (pred[static_cast<std::size_t>(i)] == data.y[static_cast<std::size_t>(i)]) ++hits;
        }
        rec.accuracy = static_cast<double>(hits) / static_cast<double>(m);
        result.history.push_back(rec);
        if (!std::isfinite(rec.total)) {
            throw NumericalError("training diverged at epoch " + std::to_string(epoch));
        }
    }

    head.validate();
    protos.validate();
    return result;
}

}  // namespace hpnet
