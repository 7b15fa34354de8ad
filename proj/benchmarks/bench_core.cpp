#include <benchmark/benchmark.h>

#include <random>

#include "pairpose/bench.hpp"
#include "pairpose/descriptors.hpp"
#include "pairpose/frame.hpp"
#include "pairpose/matching.hpp"
#include "pairpose/pipeline.hpp"

using namespace pairpose;

namespace {

PointCloud shape_cloud(int n) {
    bench::ShapeSpec spec;
    spec.kind = "composite";
    spec.point_count = n;
    spec.seed = 42;
    PointCloud c = bench::generate_shape(spec);
    c.normals.clear();
    return c;
}

void BM_BuildGrf(benchmark::State& state) {
    const PointCloud cloud = shape_cloud(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_grf(cloud));
    }
}
BENCHMARK(BM_BuildGrf)->Arg(500)->Arg(2000);

void BM_LocalRegions(benchmark::State& state) {
    const PointCloud cloud = shape_cloud(static_cast<int>(state.range(0)));
    FrameConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(local_regions(cloud, cfg));
    }
}
BENCHMARK(BM_LocalRegions)->Arg(500)->Arg(1000);

void BM_Descriptors(benchmark::State& state) {
    const PointCloud raw = shape_cloud(static_cast<int>(state.range(0)));
    const PointCloud cloud = normalize_to_frame(raw, build_grf(raw));
    FrameConfig cfg;
    const auto regions = local_regions(cloud, cfg);
    std::vector<std::optional<FrameTransform>> frames;
    for (const auto& r : regions) frames.push_back(try_build_lrf(cloud, r));
    const auto sets = lrf_normalize(cloud, regions, frames);
    for (auto _ : state) {
        benchmark::DoNotOptimize(describe_points(cloud, regions, sets));
    }
}
BENCHMARK(BM_Descriptors)->Arg(196)->Arg(512);

void BM_Correlation(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    FeatureSet f;
    f.rows.resize(n + 1, 256);
    for (Eigen::Index i = 0; i <= n; ++i)
        for (Eigen::Index j = 0; j < 256; ++j) f.rows(i, j) = g(rng);
    f.rows.rowwise().normalize();
    OverlapScores o;
    o.values = Eigen::VectorXd::Ones(n + 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_correlation(f, f, o, o));
    }
}
BENCHMARK(BM_Correlation)->Arg(196)->Arg(1024);

void BM_ScoreHypothesis(benchmark::State& state) {
    const PointCloud qc = shape_cloud(196);
    const PointCloud pc = shape_cloud(196);
    RigidTransform h;
    for (auto _ : state) {
        benchmark::DoNotOptimize(score_hypothesis(h, qc, pc));
    }
}
BENCHMARK(BM_ScoreHypothesis);

void BM_KabschWeighted(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::pair<Vec3, Vec3>> pairs;
    std::vector<double> weights;
    for (int i = 0; i < 256; ++i) {
        const Vec3 p(g(rng), g(rng), g(rng));
        pairs.emplace_back(p, p + Vec3(0.1, 0, 0));
        weights.push_back(1.0);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(kabsch_weighted(pairs, weights));
    }
}
BENCHMARK(BM_KabschWeighted);

void BM_EstimatePose(benchmark::State& state) {
    const PointCloud cloud = shape_cloud(600);
    std::mt19937_64 rng(3);
    RigidTransform t;
    t.rotation = Eigen::AngleAxisd(0.6, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    t.translation = Vec3(0.2, -0.1, 0.3);
    const PointCloud moved = apply_rigid(t, cloud);
    PipelineConfig cfg;
    cfg.n_fine = 512;
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_relative_pose(cloud, moved, cfg));
    }
}
BENCHMARK(BM_EstimatePose)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
