#include "hpnet/geometry_grad.hpp"

#include <cmath>

namespace hpnet {

namespace {
constexpr double kTiny = 1e-14;
}

AddGrads mobius_add_vjp(const Vec& x, const Vec& y, double c, const Vec& g) {
    const double xx = x.squaredNorm();
    const double yy = y.squaredNorm();
    const double xy = x.dot(y);
    const double alpha = 1.0 + 2.0 * c * xy + c * yy;
    const double beta = 1.0 - c * xx;
    const double den = 1.0 + 2.0 * c * xy + c * c * xx * yy;

    const Vec num = alpha * x + beta * y;
    const double num_g = num.dot(g);
    const double x_g = x.dot(g);
    const double y_g = y.dot(g);

    AddGrads out;
    // d(num)/dx^T g = alpha*g + 2c(x.g)y - 2c(y.g)x; d(den)/dx = 2c*y + 2c^2*||y||^2*x
    out.gx = (alpha * g + 2.0 * c * x_g * y - 2.0 * c * y_g * x) / den
             - (num_g / (den * den)) * (2.0 * c * y + 2.0 * c * c * yy * x);
    // d(num)/dy^T g = beta*g + 2c(x.g)(x+y); d(den)/dy = 2c*x + 2c^2*||x||^2*y
    out.gy = (beta * g + 2.0 * c * x_g * (x + y)) / den
             - (num_g / (den * den)) * (2.0 * c * x + 2.0 * c * c * xx * y);
    return out;
}

DistGrads distance_vjp(const Vec& x, const Vec& y, double c, double upstream) {
    const Vec u = mobius_add_raw(-x, y, c);
    const double nu = u.norm();
    DistGrads out;
    if (nu < kTiny) {
        out.gx = Vec::Zero(x.size());
        out.gy = Vec::Zero(y.size());
        return out;
    }
    // d = (2/sqrt(c)) atanh(sqrt(c)*nu)  =>  dd/du = 2*u / ((1 - c*nu^2)*nu)
    const Vec gu = (upstream * 2.0 / ((1.0 - c * nu * nu) * nu)) * u;
    AddGrads ag = mobius_add_vjp(-x, y, c, gu);
    out.gx = -ag.gx;
    out.gy = std::move(ag.gy);
    return out;
}

Vec exp_map_origin_vjp(const Vec& v, double c, const Vec& g) {
    const double t = v.norm();
    if (t < kTiny) return g;  // Jacobian tends to the identity at v = 0
    const double u = std::sqrt(c) * t;
    const double th = std::tanh(u);
    const double s = th / u;
    // ds/dt = sqrt(c) * (u*sech^2(u) - tanh(u)) / u^2
    const double ds_dt = std::sqrt(c) * (u * (1.0 - th * th) - th) / (u * u);
    return s * g + (v.dot(g) * ds_dt / t) * v;
}

MatvecGrads mobius_matvec_vjp(const Mat& M, const Vec& x, double c, const Vec& g) {
    const Vec p = M * x;
    const double q = p.norm();
    const double t = x.norm();
    const double sqrt_c = std::sqrt(c);

    MatvecGrads out;
    if (t < kTiny) {
        // r -> M*x as x -> 0
        out.gx = M.transpose() * g;
        out.gM = g * x.transpose();
        return out;
    }
    if (q < kTiny) {
        // near psi(x) = 0 the map is r ~ (atanh(sqrt(c) t)/(sqrt(c) t)) * M x
        const double k = std::atanh(sqrt_c * t) / (sqrt_c * t);
        const Vec gp = k * g;
        out.gx = M.transpose() * gp;
        out.gM = gp * x.transpose();
        return out;
    }

    const double a = std::atanh(sqrt_c * t);
    const double theta = (q / t) * a;
    const double th = std::tanh(theta);
    const double sech2 = 1.0 - th * th;
    const double p_g = p.dot(g);

    // path through p = Mx (theta depends on q = ||p||)
    const Vec gp = (1.0 / sqrt_c)
                   * (th * (g / q - (p_g / (q * q * q)) * p)
                      + (sech2 * a / t) * (p_g / (q * q)) * p);

    // direct path through t = ||x||
    const double a_prime = sqrt_c / (1.0 - c * t * t);
    const double dtheta_dt = q * (a_prime / t - a / (t * t));
    const double coef = (1.0 / sqrt_c) * sech2 * dtheta_dt * (p_g / q);

    out.gx = M.transpose() * gp + (coef / t) * x;
    out.gM = gp * x.transpose();
    return out;
}

DistGrads euclidean_distance_vjp(const Vec& x, const Vec& y, double upstream) {
    const Vec diff = x - y;
    const double d = diff.norm();
    DistGrads out;
    if (d < kTiny) {
        out.gx = Vec::Zero(x.size());
        out.gy = Vec::Zero(y.size());
        return out;
    }
    out.gx = (upstream / d) * diff;
    out.gy = -out.gx;
    return out;
}

}  // namespace hpnet
