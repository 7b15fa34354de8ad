#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

#include "pairpose/descriptors.hpp"
#include "pairpose/frame.hpp"
#include "pairpose/matching.hpp"

namespace pairpose {

/// Candidate relative pose. Under the hypothesis-distance convention the
/// stored transform maps reference coordinates onto query coordinates; its
/// inverse aligns the query cloud with the reference cloud.
struct PoseHypothesis {
    RigidTransform pose;
    double score = 0.0;    // xi = 1 / (distance + 1e-9)
    double distance = 0.0; // mean nearest-neighbor alignment distance
    std::array<int, 3> query_triplet{-1, -1, -1};     // coarse-cloud indices
    std::array<int, 3> reference_triplet{-1, -1, -1};
};

struct PipelineConfig {
    int n_coarse = 196;
    int n_fine = 2048;
    int n_hypotheses = 300;
    double delta = 0.15; // correspondence/inlier radius, normalized units in GRF space
    FrameConfig frame;
    DescriptorProviderSpec descriptor;
    std::uint64_t seed = 0;
    int fine_iterations = 1;
    double mutual_threshold = 0.05;
    double overlap_temperature = 0.05;
    double overlap_margin = 0.85;
    // Logit scale applied to the feature Gram matrix. Baseline descriptors
    // are unit vectors, so raw cosines span ~[0,1] and the softmax would be
    // nearly flat without it.
    double correlation_sharpness = 12.0;
};

struct PoseEstimate {
    RigidTransform pose;   // camera frame, query -> reference
    RigidTransform coarse; // camera frame, query -> reference
    int n_correspondences = 0;
    double residual = 0.0;        // weighted RMS over the fine correspondences
    double coarse_residual = 0.0; // same pairs under the coarse alignment alone
};

/// Least-squares rigid fit: minimizes sum w_i |R * first_i + t - second_i|^2
/// with the reflection-corrected SVD solution. Needs >= 3 pairs whose
/// weighted spans are not collinear.
RigidTransform kabsch_weighted(std::span<const std::pair<Vec3, Vec3>> pairs,
                               std::span<const double> weights);

/// Deterministic farthest-point sampling seeded at the lowest index;
/// distance ties break toward the lower index.
std::vector<int> farthest_point_sample(const PointCloud& cloud, int k);

/// Mean over reference points of the nearest transformed-query distance
/// (query mapped by the inverse of `h`), and its reciprocal score.
std::pair<double, double> score_hypothesis(const RigidTransform& h,
                                           const PointCloud& qc, const PointCloud& pc);

/// Triplets of index pairs drawn from the row-softmax mass of `x`
/// (background excluded); each valid triplet yields a scored Kabsch pose.
std::vector<PoseHypothesis> sample_hypotheses(const CorrelationField& x,
                                              const PointCloud& qc, const PointCloud& pc,
                                              int n_h, std::mt19937_64& rng);

/// Intermediate coarse-stage products needed by the full pipeline.
struct CoarseStage {
    PoseHypothesis best;
    CorrelationField field;
    std::vector<int> query_indices;     // sampled indices into the GRF cloud
    std::vector<int> reference_indices;
    CorrespondenceSet correspondences;
};

CoarseStage run_coarse_stage(const PointCloud& qg, const PointCloud& pg,
                             const PipelineConfig& cfg, std::mt19937_64& rng);

/// Best-scored hypothesis of the coarse stage on GRF-normalized clouds.
PoseHypothesis coarse_pose(const PointCloud& qg, const PointCloud& pg,
                           const PipelineConfig& cfg, std::mt19937_64& rng);

/// One fine-matching pass between the coarse-aligned query and the
/// reference, both in camera coordinates. Returns the incremental pose.
PoseEstimate fine_pose(const PointCloud& q_aligned, const PointCloud& p,
                       const PipelineConfig& cfg);

/// Full coarse-to-fine relative pose: the returned transform maps query
/// camera points onto the reference camera frame.
PoseEstimate estimate_relative_pose(const PointCloud& q_cam, const PointCloud& p_cam,
                                    const PipelineConfig& cfg, std::mt19937_64& rng);

/// Convenience overload seeding the generator from cfg.seed.
PoseEstimate estimate_relative_pose(const PointCloud& q_cam, const PointCloud& p_cam,
                                    const PipelineConfig& cfg);

} // namespace pairpose
