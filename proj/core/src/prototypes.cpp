#include "hpnet/prototypes.hpp"

#include <cmath>

#include "hpnet/geometry_grad.hpp"
#include "hpnet/rng.hpp"

namespace hpnet {

std::string to_string(SpaceMode m) {
    return m == SpaceMode::Hyperbolic ? "hyperbolic" : "euclidean";
}

SpaceMode space_mode_from_string(const std::string& s) {
    if (s == "hyperbolic") return SpaceMode::Hyperbolic;
    if (s == "euclidean") return SpaceMode::Euclidean;
    throw ConfigError("unknown mode '" + s + "' (expected hyperbolic or euclidean)");
}

double PrototypeSet::pair_distance(int i, int j) const {
    if (mode == SpaceMode::Hyperbolic) {
        return distance_raw(points.row(i).transpose(), points.row(j).transpose(), curvature);
    }
    return (points.row(i) - points.row(j)).norm();
}

Mat PrototypeSet::distance_matrix() const {
    const int k = size();
    Mat d = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            d(i, j) = d(j, i) = pair_distance(i, j);
        }
    }
    return d;
}

void PrototypeSet::validate() const {
    const int k = size();
    if (k < 2) throw DataError("prototype set needs K >= 2 classes");
    if (static_cast<int>(labels.size()) != k) {
        throw DataError("prototype set label count does not match K");
    }
    if (!points.allFinite()) throw DataError("prototype set has non-finite coordinates");
    if (mode == SpaceMode::Hyperbolic) {
        const double sqrt_c = std::sqrt(curvature);
        for (int i = 0; i < k; ++i) {
            if (sqrt_c * points.row(i).norm() > 1.0 - kBallEps) {
                throw DataError("prototype " + std::to_string(i) + " violates the ball invariant");
            }
        }
    }
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            if (points.row(i) == points.row(j)) {
                throw DataError("prototypes " + std::to_string(i) + " and " + std::to_string(j)
                                + " coincide");
            }
        }
    }
}

namespace {

void require_compatible(const PrototypeSet& p, const ClassDistanceMatrix& dm) {
    dm.validate();
    if (p.size() != dm.size()) {
        throw DataError("prototype set has K=" + std::to_string(p.size())
                        + " but distance matrix has K=" + std::to_string(dm.size()));
    }
}

}  // namespace

double distortion(const PrototypeSet& p, const ClassDistanceMatrix& dm) {
    require_compatible(p, dm);
    const int k = p.size();
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            sum += std::abs(p.pair_distance(i, j) - dm.D(i, j)) / dm.D(i, j);
        }
    }
    return 2.0 * sum / (static_cast<double>(k) * (k - 1));
}

double optimal_scale(const PrototypeSet& p, const ClassDistanceMatrix& dm) {
    require_compatible(p, dm);
    const int k = p.size();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double r = p.pair_distance(i, j) / dm.D(i, j);
            num += r;
            den += r * r;
        }
    }
    if (den <= 0.0) {
        throw NumericalError("optimal_scale: all prototype distances are zero (degenerate "
                             "configuration)");
    }
    return num / den;
}

double disto_loss(const PrototypeSet& p, const ClassDistanceMatrix& dm) {
    const double s = optimal_scale(p, dm);
    const int k = p.size();
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double r = (s * p.pair_distance(i, j) - dm.D(i, j)) / dm.D(i, j);
            sum += r * r;
        }
    }
    return 2.0 * sum / (static_cast<double>(k) * (k - 1));
}

DistortionReport distortion_report(const PrototypeSet& p, const ClassDistanceMatrix& dm) {
    DistortionReport rep;
    rep.raw_distortion = distortion(p, dm);
    rep.scale = optimal_scale(p, dm);
    rep.surrogate_loss = disto_loss(p, dm);
    return rep;
}

Mat disto_loss_grad(const PrototypeSet& p, const ClassDistanceMatrix& dm) {
    const double s = optimal_scale(p, dm);
    const int k = p.size();
    const double norm = 4.0 / (static_cast<double>(k) * (k - 1));
    Mat grad = Mat::Zero(k, p.dim());
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double d = p.pair_distance(i, j);
            const double resid = (s * d - dm.D(i, j)) / dm.D(i, j);
            // ordered pairs (i,j) and (j,i) contribute identically
            const double up = norm * resid * s / dm.D(i, j);
            const Vec xi = p.points.row(i).transpose();
            const Vec xj = p.points.row(j).transpose();
            DistGrads dg = p.mode == SpaceMode::Hyperbolic
                               ? distance_vjp(xi, xj, p.curvature, up)
                               : euclidean_distance_vjp(xi, xj, up);
            grad.row(i) += dg.gx.transpose();
            grad.row(j) += dg.gy.transpose();
        }
    }
    return grad;
}

Mat init_prototypes(int k, int dim, SpaceMode mode, double curvature, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "prototypes_init"));
    Mat points(k, dim);
    if (mode == SpaceMode::Hyperbolic) {
        const double radius = 0.1 / std::sqrt(curvature);
        for (int i = 0; i < k; ++i) {
            Vec dir(dim);
            for (int d = 0; d < dim; ++d) dir[d] = rng.normal();
            const double n = dir.norm();
            const double r = radius * std::pow(rng.uniform01(), 1.0 / dim);
            points.row(i) = (n == 0.0 ? Vec::Zero(dim) : Vec((r / n) * dir)).transpose();
        }
    } else {
        for (int i = 0; i < k; ++i) {
            for (int d = 0; d < dim; ++d) points(i, d) = 0.1 * rng.normal();
        }
    }
    return points;
}

FitResult fit_prototypes(const ClassDistanceMatrix& dm, const FitConfig& config) {
    dm.validate();
    if (config.dim < 1) throw ConfigError("fit_prototypes: dimension must be >= 1");
    if (config.steps < 0) throw ConfigError("fit_prototypes: steps must be >= 0");

    FitResult out;
    out.prototypes.mode = config.mode;
    out.prototypes.curvature =
        config.mode == SpaceMode::Hyperbolic ? Curvature(config.curvature).value() : 0.0;
    out.prototypes.labels = dm.labels;
    out.prototypes.points =
        init_prototypes(dm.size(), config.dim, config.mode, config.curvature, config.seed);

    PrototypeSet& p = out.prototypes;
    for (int step = 0; step < config.steps; ++step) {
        Mat grad = disto_loss_grad(p, dm);
        if (p.mode == SpaceMode::Hyperbolic) {
            for (int i = 0; i < p.size(); ++i) {
                Vec row = p.points.row(i).transpose();
                riemannian_step_inplace(row, Vec(grad.row(i).transpose()), config.lr,
                                        p.curvature);
                p.points.row(i) = row.transpose();
            }
        } else {
            p.points -= config.lr * grad;
        }
    }

    p.validate();
    out.report = distortion_report(p, dm);
    return out;
}

}  // namespace hpnet
