#include "hpnet/geometry.hpp"

#include <cmath>
#include <sstream>

namespace hpnet {

namespace {

// Norm threshold below which tanh/artanh scale factors are replaced by their
// exact zero-argument limits. Keeps the identity cases exact.
constexpr double kTiny = 1e-300;

void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) {
        throw DataError(std::string(what) + ": non-finite coordinates");
    }
}

void require_same_dim(const Vec& x, const Vec& y, const char* what) {
    if (x.size() != y.size()) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << x.size() << " vs " << y.size() << ")";
        throw DataError(os.str());
    }
}

}  // namespace

Curvature::Curvature(double c) : c_(c), sqrt_c_(std::sqrt(c)) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw ConfigError("curvature must be a positive finite real, got " + std::to_string(c));
    }
}

///////////////////////////////////////////////////////////////////////////////
// Raw kernels
///////////////////////////////////////////////////////////////////////////////

double conformal_factor_raw(const Vec& x, double c) {
    return 2.0 / (1.0 - c * x.squaredNorm());
}

Vec mobius_add_raw(const Vec& x, const Vec& y, double c) {
    const double xx = x.squaredNorm();
    const double yy = y.squaredNorm();
    const double xy = x.dot(y);
    const double alpha = 1.0 + 2.0 * c * xy + c * yy;
    const double beta = 1.0 - c * xx;
    const double den = 1.0 + 2.0 * c * xy + c * c * xx * yy;
    return (alpha * x + beta * y) / den;
}

double distance_raw(const Vec& x, const Vec& y, double c) {
    if (x == y) return 0.0;
    const double sqrt_c = std::sqrt(c);
    const Vec u = mobius_add_raw(-x, y, c);
    double w = sqrt_c * u.norm();
    if (w > 1.0 - kBallEps) w = 1.0 - kBallEps;
    return (2.0 / sqrt_c) * std::atanh(w);
}

Vec exp_map_origin_raw(const Vec& v, double c) {
    const double t = v.norm();
    if (t < kTiny) return Vec::Zero(v.size());
    const double u = std::sqrt(c) * t;
    return (std::tanh(u) / u) * v;
}

Vec exp_map_raw(const Vec& base, const Vec& v, double c) {
    const double t = v.norm();
    if (t < kTiny) return base;
    const double sqrt_c = std::sqrt(c);
    const double lam = conformal_factor_raw(base, c);
    const Vec w = (std::tanh(sqrt_c * lam * t / 2.0) / (sqrt_c * t)) * v;
    return mobius_add_raw(base, w, c);
}

Vec log_map_origin_raw(const Vec& x, double c) {
    const double t = x.norm();
    if (t < kTiny) return Vec::Zero(x.size());
    const double u = std::sqrt(c) * t;
    return (std::atanh(u) / u) * x;
}

Vec log_map_raw(const Vec& base, const Vec& x, double c) {
    const Vec u = mobius_add_raw(-base, x, c);
    const double t = u.norm();
    if (t < kTiny) return Vec::Zero(x.size());
    const double sqrt_c = std::sqrt(c);
    const double lam = conformal_factor_raw(base, c);
    return (2.0 / (sqrt_c * lam)) * (std::atanh(sqrt_c * t) / t) * u;
}

Vec mobius_matvec_raw(const Mat& M, const Vec& x, double c) {
    if (M.cols() != x.size()) {
        std::ostringstream os;
        os << "mobius_matvec: matrix has " << M.cols() << " columns, point has dimension "
           << x.size();
        throw DataError(os.str());
    }
    const Vec p = M * x;
    const double q = p.norm();
    const double t = x.norm();
    if (q < kTiny || t < kTiny) return Vec::Zero(M.rows());  // psi(x) = 0 side condition
    const double sqrt_c = std::sqrt(c);
    const double theta = (q / t) * std::atanh(sqrt_c * t);
    return (std::tanh(theta) / (sqrt_c * q)) * p;
}

void project_to_ball_inplace(Vec& x, double c) {
    const double sqrt_c = std::sqrt(c);
    const double w = sqrt_c * x.norm();
    if (w > 1.0 - kBallEps) {
        x *= (1.0 - kBallEps) / w;
    }
}

Vec project_to_ball_raw(Vec x, double c) {
    project_to_ball_inplace(x, c);
    return x;
}

void riemannian_step_inplace(Vec& x, const Vec& euclidean_grad, double lr, double c) {
    const double lam = conformal_factor_raw(x, c);
    const Vec v = (-lr / (lam * lam)) * euclidean_grad;
    x = exp_map_raw(x, v, c);
    project_to_ball_inplace(x, c);
}

///////////////////////////////////////////////////////////////////////////////
// BallPoint API
///////////////////////////////////////////////////////////////////////////////

BallPoint::BallPoint(Vec coords, Curvature c) : coords_(std::move(coords)), c_(c) {
    require_finite(coords_, "BallPoint");
    const double w = c_.sqrt() * coords_.norm();
    if (w > 1.0 - kBallEps) {
        std::ostringstream os;
        os << "BallPoint: sqrt(c)*||x|| = " << w << " exceeds the ball margin " << 1.0 - kBallEps;
        throw DataError(os.str());
    }
}

BallPoint BallPoint::origin(int dim, Curvature c) {
    return BallPoint(Vec::Zero(dim), c);
}

BallPoint project_to_ball(Vec raw, Curvature c) {
    require_finite(raw, "project_to_ball");
    project_to_ball_inplace(raw, c.value());
    return BallPoint(std::move(raw), c, BallPoint::unchecked_tag{});
}

namespace {

void require_compatible(const BallPoint& x, const BallPoint& y, const char* what) {
    require_same_dim(x.coords(), y.coords(), what);
    if (x.curvature() != y.curvature()) {
        throw DataError(std::string(what) + ": curvature mismatch");
    }
}

}  // namespace

BallPoint mobius_add(const BallPoint& x, const BallPoint& y) {
    require_compatible(x, y, "mobius_add");
    return project_to_ball(mobius_add_raw(x.coords(), y.coords(), x.curvature().value()),
                           x.curvature());
}

double distance(const BallPoint& x, const BallPoint& y) {
    require_compatible(x, y, "distance");
    return distance_raw(x.coords(), y.coords(), x.curvature().value());
}

double conformal_factor(const BallPoint& x) {
    return conformal_factor_raw(x.coords(), x.curvature().value());
}

BallPoint exp_map(const TangentVector& v, const BallPoint& base) {
    require_finite(v, "exp_map");
    require_same_dim(v, base.coords(), "exp_map");
    return project_to_ball(exp_map_raw(base.coords(), v, base.curvature().value()),
                           base.curvature());
}

BallPoint exp_map_origin(const TangentVector& v, int dim, Curvature c) {
    require_finite(v, "exp_map");
    if (v.size() != dim) throw DataError("exp_map: dimension mismatch");
    return project_to_ball(exp_map_origin_raw(v, c.value()), c);
}

TangentVector log_map(const BallPoint& x, const BallPoint& base) {
    require_compatible(x, base, "log_map");
    return log_map_raw(base.coords(), x.coords(), x.curvature().value());
}

TangentVector log_map_origin(const BallPoint& x) {
    return log_map_origin_raw(x.coords(), x.curvature().value());
}

BallPoint mobius_matvec(const Mat& M, const BallPoint& x, const std::optional<BallPoint>& bias) {
    Vec in = x.coords();
    if (bias) {
        require_compatible(x, *bias, "mobius_matvec bias");
        in = mobius_add_raw(in, bias->coords(), x.curvature().value());
        project_to_ball_inplace(in, x.curvature().value());
    }
    return project_to_ball(mobius_matvec_raw(M, in, x.curvature().value()), x.curvature());
}

}  // namespace hpnet
