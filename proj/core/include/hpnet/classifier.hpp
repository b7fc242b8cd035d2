#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hpnet/geometry.hpp"
#include "hpnet/hierarchy.hpp"
#include "hpnet/prototypes.hpp"

namespace hpnet {

struct FeatureBatch {
    Mat X;               // m x p, row per sample
    std::vector<int> y;  // class indices in [0, K)

    int size() const { return static_cast<int>(X.rows()); }
    int feature_dim() const { return static_cast<int>(X.cols()); }
    void validate(int num_classes) const;
};

enum class HierarchyMode { None, Lcd, Hcd };

std::string to_string(HierarchyMode m);
HierarchyMode hierarchy_mode_from_string(const std::string& s);

// Parameters of the embedding pipeline: exp-map the feature at the origin,
// Mobius-add the bias, then Mobius matrix-multiply. In euclidean mode the
// same shapes run the flat pipeline z = W(f + b).
struct HyperbolicHead {
    SpaceMode mode = SpaceMode::Hyperbolic;
    double curvature = 0.01;
    double temperature = 0.1;
    Mat W;  // proto_dim x feature_dim
    Vec b;  // feature_dim; ball point in hyperbolic mode

    int in_dim() const { return static_cast<int>(W.cols()); }
    int out_dim() const { return static_cast<int>(W.rows()); }
    void validate() const;
};

// One-hidden-layer feedforward feature provider, the stand-in backbone for
// synthetic experiments: f = W2 * tanh(W1 * x + b1) + b2.
struct TinyBackbone {
    Mat W1;  // hidden x in
    Vec b1;
    Mat W2;  // out x hidden
    Vec b2;

    static TinyBackbone init(int in_dim, int hidden_dim, int out_dim, std::uint64_t seed);

    int in_dim() const { return static_cast<int>(W1.cols()); }
    int hidden_dim() const { return static_cast<int>(W1.rows()); }
    int out_dim() const { return static_cast<int>(W2.rows()); }

    Mat forward(const Mat& X) const;  // m x out
};

///////////////////////////////////////////////////////////////////////////////
// Forward path
///////////////////////////////////////////////////////////////////////////////

// Embeds feature rows; each output row satisfies the ball invariant in
// hyperbolic mode.
Mat embed(const HyperbolicHead& head, const Mat& features);

// m x K matrix of d(z_i, a_k).
Mat sample_prototype_distances(const HyperbolicHead& head, const PrototypeSet& protos,
                               const Mat& features);

// Rows are softmax(-d/T); nonnegative, each summing to 1.
Mat predict_proba(const HyperbolicHead& head, const PrototypeSet& protos, const Mat& features);

// Cross-entropy on the distance logits, mean over samples:
//   (1/T) d(z_i, a_{y_i}) + log sum_j exp(-(1/T) d(z_i, a_j))
double dce_loss(const HyperbolicHead& head, const PrototypeSet& protos, const FeatureBatch& batch);

// dce_loss + weight * disto_loss
double total_loss(const HyperbolicHead& head, const PrototypeSet& protos,
                  const FeatureBatch& batch, const ClassDistanceMatrix& dm, double weight);

// Classes sorted by ascending distance; ties break on the lower class index.
std::vector<std::vector<int>> predict_topk(const HyperbolicHead& head, const PrototypeSet& protos,
                                           const Mat& features, int k);
std::vector<int> predict_top1(const HyperbolicHead& head, const PrototypeSet& protos,
                              const Mat& features);

///////////////////////////////////////////////////////////////////////////////
// Analytic gradients
///////////////////////////////////////////////////////////////////////////////

struct DceGrads {
    double loss = 0.0;
    Mat gW;
    Vec gb;
    Mat gProto;     // K x proto_dim
    Mat gFeatures;  // m x feature_dim, filled when requested (backbone chain)
};

DceGrads dce_loss_gradients(const HyperbolicHead& head, const PrototypeSet& protos,
                            const Mat& features, const std::vector<int>& y,
                            bool need_feature_grads);

struct BackboneGrads {
    Mat gW1;
    Vec gb1;
    Mat gW2;
    Vec gb2;
};

// Backpropagates feature gradients through the backbone.
BackboneGrads backbone_gradients(const TinyBackbone& bb, const Mat& X, const Mat& gFeatures);

///////////////////////////////////////////////////////////////////////////////
// Joint training
///////////////////////////////////////////////////////////////////////////////

struct TrainConfig {
    SpaceMode mode = SpaceMode::Hyperbolic;
    HierarchyMode hierarchy = HierarchyMode::None;
    double curvature = 0.01;
    int proto_dim = 16;
    double temperature = 0.1;
    double disto_weight = 1.0;
    int epochs = 60;
    int batch_size = 64;
    double lr = 0.1;        // W and backbone
    double proto_lr = 0.1;  // prototypes and bias
    int backbone_hidden = 0;  // 0 = features feed the head directly
    int backbone_out = 0;     // 0 = same as the input dimension
    std::uint64_t seed = 1;

    void validate() const;
};

struct Model {
    SpaceMode mode = SpaceMode::Hyperbolic;
    HierarchyMode hierarchy = HierarchyMode::None;
    double disto_weight = 1.0;
    std::vector<std::string> labels;
    std::uint64_t leaf_digest = 0;
    HyperbolicHead head;
    PrototypeSet prototypes;
    std::optional<TinyBackbone> backbone;
    std::optional<ClassDistanceMatrix> target;  // D the prototypes were trained against

    int num_classes() const { return static_cast<int>(labels.size()); }
    Mat features_of(const Mat& raw) const;
    std::vector<int> predict(const Mat& raw) const;
    std::vector<std::vector<int>> predict_topk_raw(const Mat& raw, int k) const;
    Mat predict_proba_raw(const Mat& raw) const;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double dce = 0.0;
    double disto = 0.0;  // 0 when hierarchy = none
    double total = 0.0;
    double accuracy = 0.0;
};

struct TrainResult {
    Model model;
    std::vector<EpochRecord> history;
};

// Mini-batch gradient descent over all parameter groups. Euclidean groups
// (W, backbone) take plain steps; ball-constrained groups (bias, prototypes
// in hyperbolic mode) take Riemannian-scaled steps with projection.
// Deterministic given seed.
TrainResult train(const TrainConfig& config, const FeatureBatch& data,
                  const std::vector<std::string>& class_labels,
                  const std::optional<ClassDistanceMatrix>& target,
                  std::uint64_t leaf_digest = 0);

}  // namespace hpnet
