#include "doctest.h"

#include <cmath>
#include <vector>

#include "hpnet/errors.hpp"
#include "hpnet/geometry.hpp"
#include "hpnet/hierarchy.hpp"
#include "hpnet/prototypes.hpp"
#include "hpnet/rng.hpp"

#include "test_util.hpp"

using namespace hpnet;
using testutil::fd_grad_mat;
using testutil::rel_err;
using testutil::sample_ball;

namespace {

ClassDistanceMatrix random_targets(Rng& rng, int k) {
    ClassDistanceMatrix dm;
    dm.D = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            dm.D(i, j) = dm.D(j, i) = 0.5 + 3.0 * rng.uniform01();
        }
        dm.labels.push_back("c" + std::to_string(i));
    }
    dm.encoding_tag = "lcd";
    return dm;
}

PrototypeSet random_prototypes(Rng& rng, int k, int dim, SpaceMode mode, double c) {
    PrototypeSet p;
    p.mode = mode;
    p.curvature = c;
    p.points = Mat(k, dim);
    for (int i = 0; i < k; ++i) {
        if (mode == SpaceMode::Hyperbolic) {
            p.points.row(i) = sample_ball(rng, dim, c, 0.6).transpose();
        } else {
            p.points.row(i) = testutil::sample_normal(rng, dim).transpose();
        }
        p.labels.push_back("c" + std::to_string(i));
    }
    return p;
}

// Independent reimplementations of the pair aggregation, looping over
// unordered pairs with explicit normalizers.
struct NaiveReport {
    double distortion = 0.0;
    double scale = 0.0;
    double loss_at_scale = 0.0;
};

NaiveReport naive_report(const PrototypeSet& p, const ClassDistanceMatrix& dm) {
    const int k = p.size();
    std::vector<double> d, target;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            if (p.mode == SpaceMode::Euclidean) {
                d.push_back((p.points.row(i) - p.points.row(j)).norm());
            } else {
                d.push_back(distance_raw(p.points.row(i).transpose(),
                                         p.points.row(j).transpose(), p.curvature));
            }
            target.push_back(dm.D(i, j));
        }
    }
    const double pairs = static_cast<double>(d.size());

    NaiveReport rep;
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < d.size(); ++a) {
        rep.distortion += std::abs(d[a] - target[a]) / target[a];
        num += d[a] / target[a];
        den += (d[a] / target[a]) * (d[a] / target[a]);
    }
    rep.distortion /= pairs;
    rep.scale = num / den;
    for (std::size_t a = 0; a < d.size(); ++a) {
        const double r = (rep.scale * d[a] - target[a]) / target[a];
        rep.loss_at_scale += r * r;
    }
    rep.loss_at_scale /= pairs;
    return rep;
}

// Surrogate objective at an arbitrary (not necessarily optimal) scale.
double loss_at_fixed_scale(const PrototypeSet& p, const ClassDistanceMatrix& dm, double s) {
    const int k = p.size();
    double sum = 0.0;
    int pairs = 0;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double r = (s * p.pair_distance(i, j) - dm.D(i, j)) / dm.D(i, j);
            sum += r * r;
            ++pairs;
        }
    }
    return sum / pairs;
}

}  // namespace

TEST_CASE("space mode names round-trip") {
    CHECK(to_string(SpaceMode::Hyperbolic) == "hyperbolic");
    CHECK(to_string(SpaceMode::Euclidean) == "euclidean");
    CHECK(space_mode_from_string("hyperbolic") == SpaceMode::Hyperbolic);
    CHECK(space_mode_from_string("euclidean") == SpaceMode::Euclidean);
    CHECK_THROWS_AS(space_mode_from_string("spherical"), ConfigError);
}

TEST_CASE("distance matrix of a prototype set is symmetric with zero diagonal") {
    Rng rng(61);
    for (SpaceMode mode : {SpaceMode::Hyperbolic, SpaceMode::Euclidean}) {
        const PrototypeSet p = random_prototypes(rng, 5, 3, mode, 1.0);
        const Mat d = p.distance_matrix();
        CHECK((d - d.transpose()).norm() == 0.0);
        CHECK(d.diagonal().norm() == 0.0);
        CHECK(d(0, 1) == p.pair_distance(0, 1));
        CHECK((d.array() >= 0.0).all());
    }
}

TEST_CASE("prototype validation rejects degenerate sets") {
    Rng rng(62);
    PrototypeSet p = random_prototypes(rng, 4, 3, SpaceMode::Hyperbolic, 1.0);
    p.validate();

    PrototypeSet bad = p;
    bad.points.row(2) = bad.points.row(0);
    CHECK_THROWS_AS(bad.validate(), DataError);

    bad = p;
    bad.points(1, 0) = std::nan("");
    CHECK_THROWS_AS(bad.validate(), DataError);

    bad = p;
    bad.points.row(1) *= 100.0;  // outside the ball
    CHECK_THROWS_AS(bad.validate(), DataError);

    bad = p;
    bad.labels.pop_back();
    CHECK_THROWS_AS(bad.validate(), DataError);

    // The euclidean mode has no ball constraint.
    PrototypeSet eu = random_prototypes(rng, 4, 3, SpaceMode::Euclidean, 1.0);
    eu.points.row(1) *= 100.0;
    eu.validate();

    PrototypeSet tiny = random_prototypes(rng, 2, 3, SpaceMode::Euclidean, 1.0);
    tiny.points.conservativeResize(1, Eigen::NoChange);
    tiny.labels.resize(1);
    CHECK_THROWS_AS(tiny.validate(), DataError);
}

TEST_CASE("distortion, scale and surrogate loss match naive-loop oracles") {
    Rng rng(63);
    for (SpaceMode mode : {SpaceMode::Hyperbolic, SpaceMode::Euclidean}) {
        for (int trial = 0; trial < 30; ++trial) {
            const int k = 2 + static_cast<int>(rng.uniform_index(7));
            const int dim = 2 + static_cast<int>(rng.uniform_index(4));
            const PrototypeSet p = random_prototypes(rng, k, dim, mode, 0.8);
            const ClassDistanceMatrix dm = random_targets(rng, k);
            const NaiveReport want = naive_report(p, dm);

            CHECK(distortion(p, dm) == doctest::Approx(want.distortion).epsilon(1e-12));
            CHECK(optimal_scale(p, dm) == doctest::Approx(want.scale).epsilon(1e-12));
            CHECK(disto_loss(p, dm) == doctest::Approx(want.loss_at_scale).epsilon(1e-12));

            const DistortionReport rep = distortion_report(p, dm);
            CHECK(rep.raw_distortion == doctest::Approx(want.distortion).epsilon(1e-12));
            CHECK(rep.scale == doctest::Approx(want.scale).epsilon(1e-12));
            CHECK(rep.surrogate_loss == doctest::Approx(want.loss_at_scale).epsilon(1e-12));
        }
    }
}

TEST_CASE("closed-form scale minimizes the fixed-scale surrogate") {
    Rng rng(64);
    for (int trial = 0; trial < 25; ++trial) {
        const int k = 3 + static_cast<int>(rng.uniform_index(6));
        const PrototypeSet p = random_prototypes(rng, k, 3, SpaceMode::Hyperbolic, 1.0);
        const ClassDistanceMatrix dm = random_targets(rng, k);
        const double s = optimal_scale(p, dm);
        const double at_opt = loss_at_fixed_scale(p, dm, s);
        for (double frac : {-0.1, -0.01, -0.001, 0.001, 0.01, 0.1}) {
            CHECK(at_opt <= loss_at_fixed_scale(p, dm, s * (1.0 + frac)) + 1e-15);
        }
        CHECK(at_opt == doctest::Approx(disto_loss(p, dm)).epsilon(1e-12));
    }
}

TEST_CASE("surrogate loss is invariant to rescaling the target matrix") {
    Rng rng(65);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = 3 + static_cast<int>(rng.uniform_index(5));
        const PrototypeSet p = random_prototypes(rng, k, 3, SpaceMode::Hyperbolic, 1.0);
        ClassDistanceMatrix dm = random_targets(rng, k);
        const double base = disto_loss(p, dm);
        for (double alpha : {0.25, 3.0, 17.5}) {
            ClassDistanceMatrix scaled = dm;
            scaled.D *= alpha;
            CHECK(disto_loss(p, scaled) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("surrogate loss is invariant to rescaling euclidean prototypes") {
    Rng rng(66);
    const int k = 5;
    const PrototypeSet p = random_prototypes(rng, k, 4, SpaceMode::Euclidean, 1.0);
    const ClassDistanceMatrix dm = random_targets(rng, k);
    const double base = disto_loss(p, dm);
    PrototypeSet scaled = p;
    scaled.points *= 9.0;
    CHECK(disto_loss(scaled, dm) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("two classes always fit exactly") {
    Rng rng(67);
    for (SpaceMode mode : {SpaceMode::Hyperbolic, SpaceMode::Euclidean}) {
        for (int trial = 0; trial < 20; ++trial) {
            const PrototypeSet p = random_prototypes(rng, 2, 3, mode, 1.0);
            const ClassDistanceMatrix dm = random_targets(rng, 2);
            CHECK(disto_loss(p, dm) <= 1e-10);
            // scale * distance reproduces the single target exactly
            CHECK(optimal_scale(p, dm) * p.pair_distance(0, 1) ==
                  doctest::Approx(dm.D(0, 1)).epsilon(1e-10));
            CHECK(disto_loss_grad(p, dm).norm() <= 1e-12);
        }
    }
}

TEST_CASE("equilateral triple against a 1-2-2 target scores exactly one ninth") {
    // With all three pairwise distances equal and targets {1, 2, 2}, the
    // optimal scale puts every scaled distance at 4/3, so each relative
    // residual is 1/3 in magnitude and the mean square is 1/9, independent of
    // the common distance value and of the space the points live in.
    ClassDistanceMatrix dm;
    dm.D = Mat::Zero(3, 3);
    dm.D(0, 1) = dm.D(1, 0) = 1.0;
    dm.D(0, 2) = dm.D(2, 0) = 2.0;
    dm.D(1, 2) = dm.D(2, 1) = 2.0;
    dm.labels = {"a", "b", "c"};
    dm.encoding_tag = "lcd";

    SUBCASE("euclidean equilateral triangle") {
        for (double side : {0.5, 1.0, 7.0}) {
            PrototypeSet p;
            p.mode = SpaceMode::Euclidean;
            p.points = Mat(3, 2);
            p.points << 0.0, 0.0, side, 0.0, 0.5 * side, side * std::sqrt(3.0) / 2.0;
            p.labels = {"a", "b", "c"};
            CHECK(disto_loss(p, dm) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
        }
    }

    SUBCASE("hyperbolic symmetric triple") {
        for (double radius : {0.1, 0.4, 0.8}) {
            PrototypeSet p;
            p.mode = SpaceMode::Hyperbolic;
            p.curvature = 1.0;
            p.points = Mat(3, 2);
            for (int i = 0; i < 3; ++i) {
                const double ang = 2.0 * M_PI * i / 3.0;
                p.points(i, 0) = radius * std::cos(ang);
                p.points(i, 1) = radius * std::sin(ang);
            }
            p.labels = {"a", "b", "c"};
            CHECK(disto_loss(p, dm) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("surrogate loss gradient matches finite differences through the scale") {
    // disto_loss re-optimizes the scale at every evaluation; the analytic
    // gradient holds it fixed. The two agree at the optimum because the
    // objective is stationary in s there.
    Rng rng(68);
    for (SpaceMode mode : {SpaceMode::Hyperbolic, SpaceMode::Euclidean}) {
        for (int trial = 0; trial < 15; ++trial) {
            const int k = 3 + static_cast<int>(rng.uniform_index(4));
            const int dim = 2 + static_cast<int>(rng.uniform_index(3));
            PrototypeSet p = random_prototypes(rng, k, dim, mode, 0.7);
            const ClassDistanceMatrix dm = random_targets(rng, k);

            const Mat got = disto_loss_grad(p, dm);
            const Mat want = fd_grad_mat(
                [&](const Mat& pts) {
                    PrototypeSet q = p;
                    q.points = pts;
                    return disto_loss(q, dm);
                },
                p.points);
            CHECK(rel_err(got, want) <= 1e-4);
        }
    }
}

TEST_CASE("coincident prototypes make the scale degenerate") {
    PrototypeSet p;
    p.mode = SpaceMode::Euclidean;
    p.points = Mat::Zero(3, 2);
    p.labels = {"a", "b", "c"};
    ClassDistanceMatrix dm;
    dm.D = Mat::Zero(3, 3);
    dm.D(0, 1) = dm.D(1, 0) = 1.0;
    dm.D(0, 2) = dm.D(2, 0) = 2.0;
    dm.D(1, 2) = dm.D(2, 1) = 2.0;
    dm.labels = {"a", "b", "c"};
    dm.encoding_tag = "lcd";
    CHECK_THROWS_AS(optimal_scale(p, dm), NumericalError);
    CHECK_THROWS_AS(disto_loss(p, dm), NumericalError);
}

TEST_CASE("size mismatch between prototypes and targets is rejected") {
    Rng rng(69);
    const PrototypeSet p = random_prototypes(rng, 4, 3, SpaceMode::Euclidean, 1.0);
    const ClassDistanceMatrix dm = random_targets(rng, 5);
    CHECK_THROWS_AS(distortion(p, dm), DataError);
    CHECK_THROWS_AS(disto_loss(p, dm), DataError);
    CHECK_THROWS_AS(disto_loss_grad(p, dm), DataError);
}

TEST_CASE("prototype initialization is seeded and respects the ball radius") {
    const Mat a = init_prototypes(6, 4, SpaceMode::Hyperbolic, 0.25, 99);
    const Mat b = init_prototypes(6, 4, SpaceMode::Hyperbolic, 0.25, 99);
    const Mat c = init_prototypes(6, 4, SpaceMode::Hyperbolic, 0.25, 100);
    CHECK((a - b).norm() == 0.0);
    CHECK((a - c).norm() > 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        CHECK(a.row(i).norm() <= 0.1 / std::sqrt(0.25) + 1e-12);
    }
}

TEST_CASE("fitting prototypes reduces the surrogate loss") {
    Rng rng(70);
    const Taxonomy t = [] {
        std::istringstream in(
            "root\n\ta\n\t\ta1\n\t\ta2\n\t\ta3\n\tb\n\t\tb1\n\t\tb2\n\tc\n\t\tc1\n\t\tc2\n");
        return Taxonomy::parse(in);
    }();
    const ClassDistanceMatrix dm = lcd_encode(t);

    for (SpaceMode mode : {SpaceMode::Hyperbolic, SpaceMode::Euclidean}) {
        FitConfig cfg;
        cfg.mode = mode;
        cfg.dim = 6;
        cfg.curvature = 1.0;
        cfg.steps = 400;
        cfg.lr = 0.05;
        cfg.seed = 5;

        // Loss at the raw initialization, before any steps.
        FitConfig init_only = cfg;
        init_only.steps = 0;
        const FitResult start = fit_prototypes(dm, init_only);
        const FitResult done = fit_prototypes(dm, cfg);

        CHECK(done.report.surrogate_loss < start.report.surrogate_loss);
        CHECK(done.report.surrogate_loss < 0.05);
        done.prototypes.validate();
        CHECK(done.prototypes.size() == dm.size());
        CHECK(done.prototypes.dim() == cfg.dim);
        CHECK(done.prototypes.labels == dm.labels);
    }
}

TEST_CASE("fitting prototypes is deterministic in the seed") {
    const Taxonomy t = [] {
        std::istringstream in("root\n\ta\n\t\ta1\n\t\ta2\n\tb\n\t\tb1\n\t\tb2\n");
        return Taxonomy::parse(in);
    }();
    const ClassDistanceMatrix dm = lcd_encode(t);
    FitConfig cfg;
    cfg.dim = 4;
    cfg.steps = 100;
    cfg.seed = 21;
    const FitResult a = fit_prototypes(dm, cfg);
    const FitResult b = fit_prototypes(dm, cfg);
    CHECK((a.prototypes.points - b.prototypes.points).norm() == 0.0);
    CHECK(a.report.surrogate_loss == b.report.surrogate_loss);

    cfg.seed = 22;
    const FitResult c = fit_prototypes(dm, cfg);
    CHECK((a.prototypes.points - c.prototypes.points).norm() > 0.0);
}

TEST_CASE("fit configuration is validated") {
    Rng rng(71);
    const ClassDistanceMatrix dm = random_targets(rng, 3);
    FitConfig cfg;
    cfg.dim = 0;
    CHECK_THROWS_AS(fit_prototypes(dm, cfg), ConfigError);
    cfg.dim = 4;
    cfg.steps = -1;
    CHECK_THROWS_AS(fit_prototypes(dm, cfg), ConfigError);
    cfg.steps = 10;
    cfg.curvature = -1.0;
    CHECK_THROWS_AS(fit_prototypes(dm, cfg), ConfigError);
}
