#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pairpose/geometry.hpp"
#include "pairpose/pipeline.hpp"

namespace pairpose::bench {

struct ShapeSpec {
    std::string kind = "superellipsoid"; // superellipsoid | box | cylinder | composite
    std::map<std::string, double> params;
    int point_count = 1000;
    std::uint64_t seed = 0;
};

struct BenchmarkPair {
    PointCloud query;
    PointCloud reference;
    RigidTransform gt; // maps query points into the reference frame
    double rotation_distance_deg = 0.0;
    double noise_sigma = 0.0;
    double outlier_fraction = 0.0;
    double overlap_ratio = 0.0;
};

/// Object symmetries for pose metrics; always contains the identity.
struct SymmetrySet {
    std::vector<RigidTransform> transforms{RigidTransform::identity()};
};

struct PairOptions {
    double occlusion_fraction = 0.0;
    double delta = 0.15;    // overlap-ratio radius, input units
    bool full_views = false; // skip visibility culling entirely
};

/// Deterministic surface sampling with outward normals.
PointCloud generate_shape(const ShapeSpec& spec);

/// Back-face culling against the view direction, then removal of the
/// occlusion fraction nearest a random occluder half-plane.
PointCloud partial_view(const PointCloud& cloud, const Vec3& view_dir,
                        double occlusion_fraction, std::mt19937_64& rng);

/// One benchmark pair: ground-truth rotation with geodesic angle uniform in
/// the bin, translation within half the shape radius, two partial views,
/// Gaussian noise and uniform outliers, recorded overlap ratio.
BenchmarkPair make_pair(const ShapeSpec& shape, std::pair<double, double> rot_bin_deg,
                        double noise_sigma, double outlier_fraction, std::uint64_t seed,
                        const PairOptions& opts = {});

/// Geodesic rotation distance in degrees.
double rotation_error(const RigidTransform& a, const RigidTransform& b);

/// Maximum symmetry-aware surface distance: min over symmetries of the max
/// point displacement between the estimated and ground-truth placements.
double mssd(const RigidTransform& estimate, const RigidTransform& gt,
            const PointCloud& model_points, const SymmetrySet& sym);

/// Maximum symmetry-aware projection distance in pixels.
double mspd(const RigidTransform& estimate, const RigidTransform& gt,
            const PointCloud& model_points, const SymmetrySet& sym,
            const CameraIntrinsics& k);

struct BenchConfig {
    std::vector<ShapeSpec> shapes;
    std::vector<std::pair<double, double>> bins; // degrees
    int pairs_per_bin = 100;
    double noise_sigma = 0.005;      // fraction of shape radius
    double outlier_fraction = 0.0;
    double occlusion_fraction = 0.05;
    PipelineConfig pipeline;
    std::uint64_t seed = 0;
    bool include_timing = true;

    static BenchConfig defaults();
};

struct BinReport {
    double bin_lo = 0.0;
    double bin_hi = 0.0;
    int n = 0;
    double succ_5_5 = 0.0;
    double succ_10_10 = 0.0;
    double mean_rot_err = 0.0;
    double median_rot_err = 0.0;
    double mean_overlap = 0.0;
    double std_overlap = 0.0;
    double mean_ms = 0.0;
};

struct PairResult {
    int bin = 0;
    std::uint64_t seed = 0;
    double rotation_distance_deg = 0.0;
    double overlap_ratio = 0.0;
    double rot_err_deg = 180.0;
    double trans_err = 0.0;
    double radius = 0.0;
    bool success_5_5 = false;
    bool success_10_10 = false;
    bool failed = false;
    double ms = 0.0;
};

struct BenchReport {
    std::vector<BinReport> bins;
    std::vector<PairResult> pairs;
};

/// Deterministic given the master seed: pair seeds derive from
/// (seed, pair index), so the thread count never changes results.
BenchReport run_benchmark(const BenchConfig& cfg, int threads = 1);

std::string report_csv(const BenchReport& report);
void write_report(const BenchReport& report, const std::string& out_dir);

BenchConfig load_config(const std::string& path);

/// Emits pair PLYs plus per-pair ground-truth JSON under out_dir.
void generate_pairs(const BenchConfig& cfg, const std::string& out_dir);

/// splitmix64 mix of a seed and an index, for per-pair seeding.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

} // namespace pairpose::bench
