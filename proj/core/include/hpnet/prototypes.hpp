#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpnet/geometry.hpp"
#include "hpnet/hierarchy.hpp"

namespace hpnet {

enum class SpaceMode { Hyperbolic, Euclidean };

std::string to_string(SpaceMode m);
SpaceMode space_mode_from_string(const std::string& s);

// K class prototypes, one row per leaf class. In hyperbolic mode every row
// satisfies the ball invariant; curvature is ignored in euclidean mode.
struct PrototypeSet {
    SpaceMode mode = SpaceMode::Hyperbolic;
    double curvature = 0.01;
    Mat points;  // K x dim
    std::vector<std::string> labels;

    int size() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }

    double pair_distance(int i, int j) const;
    // Full pairwise distance matrix (symmetric, zero diagonal).
    Mat distance_matrix() const;

    // K >= 2, ball invariant in hyperbolic mode, pairwise-distinct points.
    void validate() const;
};

struct DistortionReport {
    double raw_distortion = 0.0;  // mean |d - D| / D over ordered pairs
    double scale = 1.0;           // closed-form optimal s
    double surrogate_loss = 0.0;  // mean ((s*d - D)/D)^2 over ordered pairs
};

// Mean over ordered pairs i != j of |d(a_i,a_j) - D[i,j]| / D[i,j].
double distortion(const PrototypeSet& p, const ClassDistanceMatrix& dm);

// s = sum(d/D) / sum(d^2/D^2) over off-diagonal pairs; minimizes the
// surrogate loss in closed form. Degenerate (all d = 0) is a hard error.
double optimal_scale(const PrototypeSet& p, const ClassDistanceMatrix& dm);

// Mean over ordered pairs of ((s*d - D)/D)^2 at the optimal s.
double disto_loss(const PrototypeSet& p, const ClassDistanceMatrix& dm);

DistortionReport distortion_report(const PrototypeSet& p, const ClassDistanceMatrix& dm);

// Gradient of disto_loss with respect to every prototype, holding s fixed at
// its optimum (the s-path term vanishes there). Returns a K x dim matrix.
Mat disto_loss_grad(const PrototypeSet& p, const ClassDistanceMatrix& dm);

struct FitConfig {
    SpaceMode mode = SpaceMode::Hyperbolic;
    int dim = 16;
    double curvature = 0.01;
    int steps = 2000;
    double lr = 0.1;
    std::uint64_t seed = 1;
};

struct FitResult {
    PrototypeSet prototypes;
    DistortionReport report;
};

// Standalone minimization of disto_loss by (Riemannian) gradient descent.
// Deterministic given the seed.
FitResult fit_prototypes(const ClassDistanceMatrix& dm, const FitConfig& config);

// Seeded initialization shared with the joint trainer: uniform in the ball of
// radius 0.1/sqrt(c) (hyperbolic) or Gaussian sigma = 0.1 (euclidean).
Mat init_prototypes(int k, int dim, SpaceMode mode, double curvature, std::uint64_t seed);

}  // namespace hpnet
