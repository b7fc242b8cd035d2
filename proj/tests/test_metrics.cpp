#include "doctest.h"

#include <sstream>

#include "hpnet/errors.hpp"
#include "hpnet/hierarchy.hpp"
#include "hpnet/metrics.hpp"
#include "hpnet/rng.hpp"
#include "hpnet/taxonomy.hpp"

#include "test_util.hpp"

using namespace hpnet;

namespace {

Taxonomy from_text(const std::string& text) {
    std::istringstream in(text);
    return Taxonomy::parse(in);
}

// Three-level tree, four leaves: a1 a2 under a, b1 b2 under b. Sibling
// mistakes have LCA height 1, cross-branch mistakes height 2.
const char* kTree =
    "root\n"
    "\ta\n"
    "\t\ta1\n"
    "\t\ta2\n"
    "\tb\n"
    "\t\tb1\n"
    "\t\tb2\n";

}  // namespace

TEST_CASE("accuracy counts exact hits") {
    CHECK(accuracy({0, 1, 2}, {0, 1, 2}) == 1.0);
    CHECK(accuracy({0, 1, 2}, {0, 1, 0}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(accuracy({1, 1}, {0, 0}) == 0.0);
    CHECK_THROWS_AS(accuracy({}, {}), DataError);
    CHECK_THROWS_AS(accuracy({0, 1}, {0}), DataError);
}

TEST_CASE("mistake severity averages lca heights over mistakes only") {
    const Taxonomy t = from_text(kTree);

    SUBCASE("no mistakes means no severity, not zero severity") {
        const MistakeSeverity ms = mistake_severity({0, 1, 2, 3}, {0, 1, 2, 3}, t);
        CHECK_FALSE(ms.mean_height.has_value());
        CHECK(ms.mistakes == 0);
    }

    SUBCASE("a single sibling mistake scores height 1") {
        const MistakeSeverity ms = mistake_severity({1, 1, 2, 3}, {0, 1, 2, 3}, t);
        REQUIRE(ms.mean_height.has_value());
        CHECK(*ms.mean_height == 1.0);
        CHECK(ms.mistakes == 1);
    }

    SUBCASE("a single cross-branch mistake scores height 2") {
        const MistakeSeverity ms = mistake_severity({2, 1, 2, 3}, {0, 1, 2, 3}, t);
        REQUIRE(ms.mean_height.has_value());
        CHECK(*ms.mean_height == 2.0);
        CHECK(ms.mistakes == 1);
    }

    SUBCASE("mixed mistakes average over the mistaken samples") {
        // predictions: sibling miss (1), cross miss (2), hit, hit
        const MistakeSeverity ms = mistake_severity({1, 3, 2, 3}, {0, 1, 2, 3}, t);
        REQUIRE(ms.mean_height.has_value());
        CHECK(*ms.mean_height == doctest::Approx(1.5).epsilon(1e-15));
        CHECK(ms.mistakes == 2);
    }
}

TEST_CASE("mistake severity validates inputs") {
    const Taxonomy t = from_text(kTree);
    CHECK_THROWS_AS(mistake_severity({}, {}, t), DataError);
    CHECK_THROWS_AS(mistake_severity({0}, {0, 1}, t), DataError);
    CHECK_THROWS_AS(mistake_severity({9}, {0}, t), DataError);   // class out of range
    CHECK_THROWS_AS(mistake_severity({0}, {-1}, t), DataError);
}

TEST_CASE("top-k tree distance scores partial credit by hand") {
    const Taxonomy t = from_text(kTree);
    const ClassDistanceMatrix dm = lcd_encode(t);

    // Sample 0: truth a1(0), predictions [a1, a2] -> distances 0, 1 -> 0.5.
    // Sample 1: truth b1(2), predictions [a1, b2] -> distances 2, 1 -> 1.5.
    const std::vector<std::vector<int>> topk = {{0, 1}, {0, 3}};
    const std::vector<int> truth = {0, 2};
    CHECK(hd_at_k(topk, truth, dm) == doctest::Approx(1.0).epsilon(1e-15));

    // k = 1 reduces to the distance of the single prediction.
    CHECK(hd_at_k({{1}, {2}}, {0, 2}, dm) == doctest::Approx(0.5).epsilon(1e-15));
    // All exact hits score zero.
    CHECK(hd_at_k({{0}, {2}}, {0, 2}, dm) == 0.0);
}

TEST_CASE("top-k tree distance validates shapes and ranges") {
    const Taxonomy t = from_text(kTree);
    const ClassDistanceMatrix dm = lcd_encode(t);
    CHECK_THROWS_AS(hd_at_k({}, {}, dm), DataError);
    CHECK_THROWS_AS(hd_at_k({{0}}, {0, 1}, dm), DataError);       // row/truth mismatch
    CHECK_THROWS_AS(hd_at_k({{0}, {0, 1}}, {0, 1}, dm), DataError);  // ragged rows
    CHECK_THROWS_AS(hd_at_k({{}, {}}, {0, 1}, dm), DataError);    // empty rows
    CHECK_THROWS_AS(hd_at_k({{7}}, {0}, dm), DataError);          // class out of range
    CHECK_THROWS_AS(hd_at_k({{0}}, {9}, dm), DataError);
}

TEST_CASE("evaluation report combines the metrics") {
    const Taxonomy t = from_text(kTree);

    // 4 samples, k = 2. Top-1: hit, sibling miss, cross miss, hit.
    const std::vector<std::vector<int>> topk = {{0, 1}, {0, 1}, {0, 2}, {3, 2}};
    const std::vector<int> truth = {0, 1, 2, 3};
    const EvalReport rep = evaluate(topk, truth, t);

    CHECK(rep.samples == 4);
    CHECK(rep.k == 2);
    CHECK(rep.accuracy == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rep.mistake_count == 2);
    REQUIRE(rep.mistake_severity.has_value());
    // top-1 misses: pred 0 for truth 1 (height 1), pred 0 for truth 2 (height 2)
    CHECK(*rep.mistake_severity == doctest::Approx(1.5).epsilon(1e-15));

    // hd@2 rows: truth 0 vs {0,1} -> (0+1)/2; truth 1 vs {0,1} -> (1+0)/2;
    // truth 2 vs {0,2} -> (2+0)/2; truth 3 vs {3,2} -> (0+1)/2.
    CHECK(rep.hd_at_k == doctest::Approx((0.5 + 0.5 + 1.0 + 0.5) / 4.0).epsilon(1e-12));
}

TEST_CASE("evaluation with no mistakes leaves severity absent") {
    const Taxonomy t = from_text(kTree);
    const EvalReport rep = evaluate({{0}, {1}}, {0, 1}, t);
    CHECK(rep.accuracy == 1.0);
    CHECK(rep.mistake_count == 0);
    CHECK_FALSE(rep.mistake_severity.has_value());
    CHECK(rep.k == 1);
}

TEST_CASE("metrics agree with brute-force recomputation on random trees") {
    Rng rng(101);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 4 + static_cast<int>(rng.uniform_index(30));
        const Taxonomy t = from_text(testutil::random_tree_edges(rng, n));
        const int K = t.leaf_count();
        const int samples = 1 + static_cast<int>(rng.uniform_index(40));
        const int k = 1 + static_cast<int>(rng.uniform_index(K));

        std::vector<int> truth(samples);
        std::vector<std::vector<int>> topk(samples, std::vector<int>(k));
        for (int i = 0; i < samples; ++i) {
            truth[i] = static_cast<int>(rng.uniform_index(K));
            for (int j = 0; j < k; ++j) {
                topk[i][j] = static_cast<int>(rng.uniform_index(K));
            }
        }

        const EvalReport rep = evaluate(topk, truth, t);

        int hits = 0;
        int mistakes = 0;
        double severity_sum = 0.0;
        double hd_sum = 0.0;
        for (int i = 0; i < samples; ++i) {
            const int pred = topk[i][0];
            if (pred == truth[i]) {
                ++hits;
            } else {
                ++mistakes;
                const auto lca = testutil::brute_lca(t, t.leaf(pred), t.leaf(truth[i]));
                severity_sum += testutil::brute_height(t, lca);
            }
            double row = 0.0;
            for (int j = 0; j < k; ++j) {
                if (topk[i][j] == truth[i]) continue;
                const auto lca = testutil::brute_lca(t, t.leaf(topk[i][j]), t.leaf(truth[i]));
                row += testutil::brute_height(t, lca);
            }
            hd_sum += row / k;
        }

        CHECK(rep.samples == samples);
        CHECK(rep.k == k);
        CHECK(rep.accuracy == doctest::Approx(static_cast<double>(hits) / samples).epsilon(1e-12));
        CHECK(rep.mistake_count == mistakes);
        if (mistakes == 0) {
            CHECK_FALSE(rep.mistake_severity.has_value());
        } else {
            REQUIRE(rep.mistake_severity.has_value());
            CHECK(*rep.mistake_severity ==
                  doctest::Approx(severity_sum / mistakes).epsilon(1e-12));
        }
        CHECK(rep.hd_at_k == doctest::Approx(hd_sum / samples).epsilon(1e-12));
    }
}

TEST_CASE("evaluation rejects ragged prediction rows") {
    const Taxonomy t = from_text(kTree);
    CHECK_THROWS_AS(evaluate({{0, 1}, {0}}, {0, 1}, t), DataError);
    CHECK_THROWS_AS(evaluate({}, {}, t), DataError);
}
