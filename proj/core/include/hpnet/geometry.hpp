#pragma once

#include <Eigen/Core>

#include <optional>

#include "hpnet/errors.hpp"

namespace hpnet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Tangent vectors are unconstrained Euclidean vectors.
using TangentVector = Eigen::VectorXd;

// Points must satisfy sqrt(c)*||x|| <= 1 - kBallEps. The margin keeps artanh
// arguments away from 1, where the conformal factor and gradients blow up.
constexpr double kBallEps = 1e-5;

// Positive ball parameter c; radius of the ball is 1/sqrt(c). c = 0 is
// rejected, Euclidean behaviour is a mode switch in the prototype/classifier
// layers, not a degenerate curvature.
class Curvature {
public:
    explicit Curvature(double c);
    double value() const { return c_; }
    double sqrt() const { return sqrt_c_; }
    bool operator==(const Curvature& o) const { return c_ == o.c_; }
    bool operator!=(const Curvature& o) const { return c_ != o.c_; }

private:
    double c_;
    double sqrt_c_;
};

///////////////////////////////////////////////////////////////////////////////
// Raw kernels on plain vectors.
//
// Callers are responsible for the ball invariant on the inputs; outputs of
// the closed forms are NOT re-projected here. The BallPoint API below wraps
// these with validation and projection.
///////////////////////////////////////////////////////////////////////////////

// lambda_x = 2 / (1 - c*||x||^2)
double conformal_factor_raw(const Vec& x, double c);

// Mobius addition x (+)_c y, exact closed form.
Vec mobius_add_raw(const Vec& x, const Vec& y, double c);

// d_c(x, y) = (2/sqrt(c)) * artanh(sqrt(c) * ||(-x) (+)_c y||).
// The artanh argument is clamped to 1 - kBallEps, mirroring the projection
// mobius_add applies to its result.
double distance_raw(const Vec& x, const Vec& y, double c);

// exp-map at the origin: tanh(sqrt(c)*||v||) * v / (sqrt(c)*||v||)
Vec exp_map_origin_raw(const Vec& v, double c);

// exp-map at base x: x (+)_c tanh(sqrt(c)*lambda_x*||v||/2) * v/(sqrt(c)*||v||)
Vec exp_map_raw(const Vec& base, const Vec& v, double c);

// log-map inverting exp_map_raw; log_map_origin_raw is the base-at-origin form
Vec log_map_origin_raw(const Vec& x, double c);
Vec log_map_raw(const Vec& base, const Vec& x, double c);

// Mobius matrix-vector product; returns the zero vector when M*x = 0.
Vec mobius_matvec_raw(const Mat& M, const Vec& x, double c);

// Radial clip onto norm (1 - kBallEps)/sqrt(c) if the point lies outside it.
void project_to_ball_inplace(Vec& x, double c);
Vec project_to_ball_raw(Vec x, double c);

// One Riemannian gradient-descent step: rescale the Euclidean gradient by
// 1/lambda_x^2, follow the geodesic via the exp map and re-project.
void riemannian_step_inplace(Vec& x, const Vec& euclidean_grad, double lr, double c);

///////////////////////////////////////////////////////////////////////////////
// BallPoint API
///////////////////////////////////////////////////////////////////////////////

class BallPoint {
public:
    // Validates the invariant; throws DataError on non-finite coordinates or
    // a point outside the margin.
    BallPoint(Vec coords, Curvature c);

    static BallPoint origin(int dim, Curvature c);

    const Vec& coords() const { return coords_; }
    Curvature curvature() const { return c_; }
    int dim() const { return static_cast<int>(coords_.size()); }
    double norm() const { return coords_.norm(); }

private:
    struct unchecked_tag {};
    BallPoint(Vec coords, Curvature c, unchecked_tag) : coords_(std::move(coords)), c_(c) {}

    Vec coords_;
    Curvature c_;

    friend BallPoint project_to_ball(Vec raw, Curvature c);
};

BallPoint mobius_add(const BallPoint& x, const BallPoint& y);
double distance(const BallPoint& x, const BallPoint& y);
double conformal_factor(const BallPoint& x);
BallPoint exp_map(const TangentVector& v, const BallPoint& base);
BallPoint exp_map_origin(const TangentVector& v, int dim, Curvature c);
TangentVector log_map(const BallPoint& x, const BallPoint& base);
TangentVector log_map_origin(const BallPoint& x);
BallPoint mobius_matvec(const Mat& M, const BallPoint& x, const std::optional<BallPoint>& bias = std::nullopt);
BallPoint project_to_ball(Vec raw, Curvature c);

}  // namespace hpnet
