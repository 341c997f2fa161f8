#include <benchmark/benchmark.h>

#include "trcl/continual.hpp"
#include "trcl/curvature.hpp"
#include "trcl/fisher.hpp"
#include "trcl/rng.hpp"
#include "trcl/verify.hpp"

using namespace trcl;

namespace {

Vector unit(std::size_t n, std::uint64_t seed) {
    auto gen = keyed_engine({seed, 1});
    Vector v = standard_normal(gen, n);
    v *= 1.0 / norm2(v);
    return v;
}

void BM_CurvatureApplyRankOne(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Curvature c = Curvature::rank_one(2.0, unit(n, 0));
    const Vector d = unit(n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(curvature_apply(c, d));
}
BENCHMARK(BM_CurvatureApplyRankOne)->Arg(64)->Arg(1024)->Arg(16384);

void BM_CurvatureApplyFull(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto gen = keyed_engine({2, 2});
    const Matrix g(n, n, standard_normal(gen, n * n).values());
    const Curvature c = Curvature::full(g.transpose() * g);
    const Vector d = unit(n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(curvature_apply(c, d));
}
BENCHMARK(BM_CurvatureApplyFull)->Arg(16)->Arg(64);

void BM_MlpGrad(benchmark::State& state) {
    const ModelSpec spec = ModelSpec::mlp({1, 32, 32, 1});
    const Params theta = init_params(spec, 0);
    const Batch batch = random_batch(spec, static_cast<std::size_t>(state.range(0)), 0);
    for (auto _ : state) benchmark::DoNotOptimize(grad(spec, theta, batch, 0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpGrad)->Arg(16)->Arg(64)->Arg(256);

void BM_EmpiricalFisher(benchmark::State& state) {
    // 321 parameters, under the dense-matrix cap.
    const ModelSpec spec = ModelSpec::mlp({1, 16, 16, 1});
    const Params theta = init_params(spec, 0);
    const Batch data = random_batch(spec, 400, 0);
    const auto mode = static_cast<FisherMode>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(empirical_fisher(spec, theta, data, mode, 0));
    state.SetLabel(to_string(mode));
}
BENCHMARK(BM_EmpiricalFisher)
    ->Arg(static_cast<int>(FisherMode::Full))
    ->Arg(static_cast<int>(FisherMode::Diagonal))
    ->Arg(static_cast<int>(FisherMode::RankOne));

void BM_TrustRegionStep(benchmark::State& state) {
    const ModelSpec spec = ModelSpec::mlp({1, 32, 32, 1});
    const Params theta = init_params(spec, 0);
    const Batch batch = random_batch(spec, 64, 0);
    const auto past = static_cast<int>(state.range(0));
    std::vector<ReplayBatch> replay;
    std::vector<TaskAnchor> anchors;
    for (int i = 1; i <= past; ++i) {
        const Batch old = random_batch(spec, 64, static_cast<std::uint64_t>(i));
        replay.push_back({i, old});
        FisherEstimate est = empirical_fisher(spec, theta, old, FisherMode::RankOne, 0);
        anchors.emplace_back(i, theta, std::move(est.curvature), est.degenerate);
    }
    ContinualConfig cfg;
    cfg.lambda = 1.0;
    cfg.beta = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(trust_region_step(spec, theta, batch, replay, anchors, cfg, 0));
}
BENCHMARK(BM_TrustRegionStep)->Arg(1)->Arg(4);

}  // namespace
BENCHMARK_MAIN();
