// End-to-end benchmarks: hierarchy encoding, loss gradients, training epochs
// and batch prediction on synthetic data.

#include <benchmark/benchmark.h>

#include <optional>
#include <sstream>

#include "hpnet/classifier.hpp"
#include "hpnet/hierarchy.hpp"
#include "hpnet/prototypes.hpp"
#include "hpnet/rng.hpp"
#include "hpnet/synthetic.hpp"
#include "hpnet/taxonomy.hpp"

using namespace hpnet;

namespace {

SyntheticDataset dataset() {
    SyntheticConfig cfg;
    cfg.branching = {4, 4};
    cfg.feature_dim = 16;
    cfg.train_per_class = 50;
    cfg.test_per_class = 20;
    cfg.seed = 11;
    return make_synthetic(cfg);
}

void bm_lcd_encode(benchmark::State& state) {
    const SyntheticDataset ds = dataset();
    for (auto _ : state) {
        benchmark::DoNotOptimize(lcd_encode(ds.taxonomy));
    }
}

void bm_disto_grad(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    Rng rng(3);
    PrototypeSet p;
    p.mode = SpaceMode::Hyperbolic;
    p.curvature = 1.0;
    p.points = Mat(k, 16);
    ClassDistanceMatrix dm;
    dm.D = Mat::Zero(k, k);
    dm.encoding_tag = "lcd";
    for (int i = 0; i < k; ++i) {
        Vec v(16);
        for (int d = 0; d < 16; ++d) v[d] = rng.normal();
        v.normalize();
        p.points.row(i) = (0.5 * rng.uniform01() * v).transpose();
        p.labels.push_back("c" + std::to_string(i));
        dm.labels.push_back("c" + std::to_string(i));
    }
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) dm.D(i, j) = dm.D(j, i) = 1.0 + rng.uniform01();
    for (auto _ : state) {
        benchmark::DoNotOptimize(disto_loss_grad(p, dm));
    }
}

void bm_dce_gradients(benchmark::State& state) {
    const SyntheticDataset ds = dataset();
    TrainConfig cfg;
    cfg.mode = SpaceMode::Hyperbolic;
    cfg.curvature = 1.0;
    cfg.proto_dim = 16;
    cfg.epochs = 1;
    cfg.seed = 5;
    const Model m = train(cfg, ds.train, ds.taxonomy.leaf_labels(), std::nullopt,
                          ds.taxonomy.leaf_digest())
                        .model;
    const int batch = static_cast<int>(state.range(0));
    const Mat X = ds.train.X.topRows(batch);
    std::vector<int> y(ds.train.y.begin(), ds.train.y.begin() + batch);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dce_loss_gradients(m.head, m.prototypes, X, y, false));
    }
}

void bm_train_epoch(benchmark::State& state) {
    const SyntheticDataset ds = dataset();
    const ClassDistanceMatrix dm = lcd_encode(ds.taxonomy);
    for (auto _ : state) {
        TrainConfig cfg;
        cfg.mode = SpaceMode::Hyperbolic;
        cfg.hierarchy = HierarchyMode::Lcd;
        cfg.curvature = 1.0;
        cfg.proto_dim = 16;
        cfg.epochs = static_cast<int>(state.range(0));
        cfg.batch_size = 64;
        cfg.seed = 5;
        benchmark::DoNotOptimize(
            train(cfg, ds.train, ds.taxonomy.leaf_labels(), dm, ds.taxonomy.leaf_digest()));
    }
}

void bm_predict_topk(benchmark::State& state) {
    const SyntheticDataset ds = dataset();
    TrainConfig cfg;
    cfg.mode = SpaceMode::Hyperbolic;
    cfg.curvature = 1.0;
    cfg.proto_dim = 16;
    cfg.epochs = 5;
    cfg.seed = 5;
    const Model m = train(cfg, ds.train, ds.taxonomy.leaf_labels(), std::nullopt,
                          ds.taxonomy.leaf_digest())
                        .model;
    for (auto _ : state) {
        benchmark::DoNotOptimize(m.predict_topk_raw(ds.test.X, 5));
    }
}

}  // namespace

BENCHMARK(bm_lcd_encode);
BENCHMARK(bm_disto_grad)->Arg(12)->Arg(64);
BENCHMARK(bm_dce_gradients)->Arg(64)->Arg(256);
BENCHMARK(bm_train_epoch)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_predict_topk)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
