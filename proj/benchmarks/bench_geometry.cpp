// Microbenchmarks for the ball primitives; dimension is the benchmark range.

#include <benchmark/benchmark.h>

#include "hpnet/geometry.hpp"
#include "hpnet/geometry_grad.hpp"
#include "hpnet/rng.hpp"

using namespace hpnet;

namespace {

Vec ball_point(Rng& rng, int dim, double c) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    v.normalize();
    v *= 0.6 / std::sqrt(c);
    return v;
}

void bm_mobius_add(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const double c = 1.0;
    Rng rng(7);
    const Vec x = ball_point(rng, dim, c);
    const Vec y = ball_point(rng, dim, c);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mobius_add_raw(x, y, c));
    }
}

void bm_distance(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const double c = 1.0;
    Rng rng(7);
    const Vec x = ball_point(rng, dim, c);
    const Vec y = ball_point(rng, dim, c);
    for (auto _ : state) {
        benchmark::DoNotOptimize(distance_raw(x, y, c));
    }
}

void bm_exp_map(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const double c = 1.0;
    Rng rng(7);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = 0.1 * rng.normal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(exp_map_origin_raw(v, c));
    }
}

void bm_distance_vjp(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const double c = 1.0;
    Rng rng(7);
    const Vec x = ball_point(rng, dim, c);
    const Vec y = ball_point(rng, dim, c);
    for (auto _ : state) {
        benchmark::DoNotOptimize(distance_vjp(x, y, c, 1.0));
    }
}

void bm_matvec(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const double c = 1.0;
    Rng rng(7);
    Mat M(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) M(i, j) = 0.3 * rng.normal();
    const Vec x = ball_point(rng, dim, c);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mobius_matvec_raw(M, x, c));
    }
}

}  // namespace

BENCHMARK(bm_mobius_add)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(bm_distance)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(bm_exp_map)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(bm_distance_vjp)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(bm_matvec)->Arg(16)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
