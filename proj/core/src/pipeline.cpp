#include "pairpose/pipeline.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pairpose {
namespace {

constexpr double kScoreEpsilon = 1e-9;

PointCloud subset(const PointCloud& cloud, const std::vector<int>& indices) {
    PointCloud out;
    out.points.reserve(indices.size());
    for (int i : indices) out.points.push_back(cloud.points[static_cast<std::size_t>(i)]);
    return out;
}

/// Descriptors for the regions centered at `indices`, background row added.
FeatureSet sampled_features(const PointCloud& cloud, const std::vector<int>& indices,
                            const PipelineConfig& cfg, const DescriptorProvider& provider) {
    const auto regions = regions_for_centers(cloud, indices, cfg.frame);
    std::vector<std::optional<FrameTransform>> frames;
    frames.reserve(regions.size());
    for (const auto& r : regions) frames.push_back(try_build_lrf(cloud, r));
    const auto sets = lrf_normalize(cloud, regions, frames);
    return provider.describe(cloud, regions, sets);
}

FeatureSet concat_normalized(const FeatureSet& a, const FeatureSet& b) {
    FeatureSet out;
    out.rows.resize(a.count(), a.dim() + b.dim());
    out.rows << a.rows, b.rows;
    const double inv = 1.0 / std::sqrt(2.0); // both blocks have unit rows
    out.rows *= inv;
    return out;
}

// Overlap scores come from the descriptor blocks alone; positional
// encodings shrink every cosine after concatenation, which would push all
// points below the overlap margin.
CorrelationField correlate(const FeatureSet& fq, const FeatureSet& fp,
                           const FeatureSet& overlap_fq, const FeatureSet& overlap_fp,
                           const PipelineConfig& cfg) {
    FeatureSet bq = add_background_row(fq);
    FeatureSet bp = add_background_row(fp);
    const auto [oq, op] = heuristic_overlap(add_background_row(overlap_fq),
                                            add_background_row(overlap_fp),
                                            cfg.overlap_temperature, cfg.overlap_margin);
    const double row_scale = std::sqrt(std::max(cfg.correlation_sharpness, 0.0));
    bq.rows *= row_scale;
    bp.rows *= row_scale;
    return build_correlation(bq, bp, oq, op);
}

bool collinear(const Vec3& a, const Vec3& b, const Vec3& c) {
    return (b - a).cross(c - a).norm() < 1e-10;
}

double weighted_rms(const std::vector<std::pair<Vec3, Vec3>>& pairs,
                    const std::vector<double>& weights, const RigidTransform& t) {
    double acc = 0.0;
    double wsum = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        acc += weights[i] * (t.apply(pairs[i].first) - pairs[i].second).squaredNorm();
        wsum += weights[i];
    }
    return wsum > 0.0 ? std::sqrt(acc / wsum) : 0.0;
}

} // namespace

RigidTransform kabsch_weighted(std::span<const std::pair<Vec3, Vec3>> pairs,
                               std::span<const double> weights) {
    if (pairs.size() != weights.size()) {
        throw DimensionMismatch("kabsch_weighted: pair/weight counts differ");
    }
    if (pairs.size() < 3) throw DegenerateGeometry("kabsch_weighted: fewer than 3 pairs");

    double wsum = 0.0;
    Vec3 qbar = Vec3::Zero();
    Vec3 pbar = Vec3::Zero();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (weights[i] < 0.0) throw std::invalid_argument("kabsch_weighted: negative weight");
        wsum += weights[i];
        qbar += weights[i] * pairs[i].first;
        pbar += weights[i] * pairs[i].second;
    }
    if (wsum <= 0.0) throw DegenerateGeometry("kabsch_weighted: zero total weight");
    qbar /= wsum;
    pbar /= wsum;

    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        h += weights[i] * (pairs[i].first - qbar) * (pairs[i].second - pbar).transpose();
    }
    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    if (sv[1] <= 1e-12 * std::max(sv[0], 1e-300)) {
        throw DegenerateGeometry("kabsch_weighted: rank-deficient cross-covariance");
    }
    Mat3 d = Mat3::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;

    RigidTransform t;
    t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
    t.translation = pbar - t.rotation * qbar;
    return t;
}

std::vector<int> farthest_point_sample(const PointCloud& cloud, int k) {
    const int n = static_cast<int>(cloud.size());
    if (k >= n) {
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(k));
    std::vector<double> min_dist(static_cast<std::size_t>(n),
                                 std::numeric_limits<double>::infinity());
    int current = 0;
    picked.push_back(current);
    for (int iter = 1; iter < k; ++iter) {
        const Vec3& c = cloud.points[static_cast<std::size_t>(current)];
        int next = -1;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            const double d = (cloud.points[static_cast<std::size_t>(i)] - c).squaredNorm();
            auto& m = min_dist[static_cast<std::size_t>(i)];
            if (d < m) m = d;
            if (m > best) {
                best = m;
                next = i;
            }
        }
        picked.push_back(next);
        current = next;
    }
    return picked;
}

std::pair<double, double> score_hypothesis(const RigidTransform& h,
                                           const PointCloud& qc, const PointCloud& pc) {
    if (qc.empty() || pc.empty()) throw EmptySelection("score_hypothesis: empty cloud");
    std::vector<Vec3> tq(qc.size());
    const Mat3 rt = h.rotation.transpose();
    for (std::size_t i = 0; i < qc.size(); ++i) {
        tq[i] = rt * (qc.points[i] - h.translation);
    }
    double acc = 0.0;
    for (const auto& p : pc.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : tq) best = std::min(best, (q - p).squaredNorm());
        acc += std::sqrt(best);
    }
    const double distance = acc / static_cast<double>(pc.size());
    return {distance, 1.0 / (distance + kScoreEpsilon)};
}

std::vector<PoseHypothesis> sample_hypotheses(const CorrelationField& x,
                                              const PointCloud& qc, const PointCloud& pc,
                                              int n_h, std::mt19937_64& rng) {
    if (n_h < 1) throw std::invalid_argument("sample_hypotheses: n_h must be >= 1");
    const Eigen::Index nq = x.logits.rows() - 1;
    const Eigen::Index np = x.logits.cols() - 1;
    if (static_cast<Eigen::Index>(qc.size()) != nq ||
        static_cast<Eigen::Index>(pc.size()) != np) {
        throw DimensionMismatch("sample_hypotheses: cloud sizes differ from field");
    }

    // Categorical distribution over non-background (i, j) cells: softmax of
    // the whole non-background block. A per-row softmax would cancel the
    // overlap weighting, because every row sums to one no matter how its
    // logits were scaled down.
    const double top = x.logits.block(1, 1, nq, np).maxCoeff();
    std::vector<double> cdf;
    cdf.reserve(static_cast<std::size_t>(nq * np));
    double mass = 0.0;
    for (Eigen::Index i = 1; i <= nq; ++i) {
        for (Eigen::Index j = 1; j <= np; ++j) {
            mass += std::exp(x.logits(i, j) - top);
            cdf.push_back(mass);
        }
    }
    if (!(mass > 0.0)) throw NoValidHypothesis("sample_hypotheses: no correlation mass");

    std::uniform_real_distribution<double> uni(0.0, mass);
    auto draw_pair = [&]() {
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), uni(rng));
        const std::size_t flat = std::min<std::size_t>(
            static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        const int qi = static_cast<int>(flat / static_cast<std::size_t>(np));
        const int pj = static_cast<int>(flat % static_cast<std::size_t>(np));
        return std::make_pair(qi, pj); // 0-based cloud indices
    };

    std::vector<PoseHypothesis> hyps;
    hyps.reserve(static_cast<std::size_t>(n_h));
    const long max_attempts = 10L * n_h;
    for (long attempt = 0; attempt < max_attempts && static_cast<int>(hyps.size()) < n_h;
         ++attempt) {
        // Concentrated distributions make verbatim re-draws common, so each
        // slot rejects row/column collisions locally before the attempt
        // counts as degenerate.
        std::array<std::pair<int, int>, 3> triplet;
        int filled = 0;
        for (int slot = 0; slot < 3; ++slot) {
            for (int tries = 0; tries < 32; ++tries) {
                const auto cand = draw_pair();
                bool clash = false;
                for (int k = 0; k < filled; ++k) {
                    clash = clash || triplet[static_cast<std::size_t>(k)].first == cand.first ||
                            triplet[static_cast<std::size_t>(k)].second == cand.second;
                }
                if (!clash) {
                    triplet[static_cast<std::size_t>(slot)] = cand;
                    ++filled;
                    break;
                }
            }
        }
        if (filled < 3) continue;

        const auto& qpts = qc.points;
        const auto& ppts = pc.points;
        const auto q_at = [&](int k) { return qpts[static_cast<std::size_t>(triplet[k].first)]; };
        const auto p_at = [&](int k) { return ppts[static_cast<std::size_t>(triplet[k].second)]; };
        if (collinear(q_at(0), q_at(1), q_at(2)) || collinear(p_at(0), p_at(1), p_at(2))) {
            continue;
        }

        // Fit reference -> query so the hypothesis matches the distance
        // formula's inverse-mapping convention.
        const std::array<std::pair<Vec3, Vec3>, 3> fit = {
            std::make_pair(p_at(0), q_at(0)),
            std::make_pair(p_at(1), q_at(1)),
            std::make_pair(p_at(2), q_at(2)),
        };
        const std::array<double, 3> w = {1.0, 1.0, 1.0};
        PoseHypothesis h;
        try {
            h.pose = kabsch_weighted(fit, w);
        } catch (const DegenerateGeometry&) {
            continue;
        }
        std::tie(h.distance, h.score) = score_hypothesis(h.pose, qc, pc);
        for (int k = 0; k < 3; ++k) {
            h.query_triplet[static_cast<std::size_t>(k)] = triplet[static_cast<std::size_t>(k)].first;
            h.reference_triplet[static_cast<std::size_t>(k)] = triplet[static_cast<std::size_t>(k)].second;
        }
        hyps.push_back(std::move(h));
    }
    if (hyps.empty()) throw NoValidHypothesis("sample_hypotheses: all attempts degenerate");
    return hyps;
}

namespace {

// Features and correlation always come from the GRF clouds; the hypothesis
// solve/score clouds may differ (the full pipeline passes camera-frame
// subsets, where rigid fits are exact and alignment distances separate
// right from wrong far better than in per-cloud normalized coordinates).
CoarseStage coarse_stage_impl(const PointCloud& qg, const PointCloud& pg,
                              const PointCloud* q_solve, const PointCloud* p_solve,
                              const PipelineConfig& cfg, std::mt19937_64& rng) {
    const auto provider = make_descriptor_provider(cfg.descriptor);

    CoarseStage stage;
    stage.query_indices = farthest_point_sample(qg, cfg.n_coarse);
    stage.reference_indices = farthest_point_sample(pg, cfg.n_coarse);

    const FeatureSet fq = sampled_features(qg, stage.query_indices, cfg, *provider);
    const FeatureSet fp = sampled_features(pg, stage.reference_indices, cfg, *provider);
    stage.field = correlate(fq, fp, fq, fp, cfg);

    const PointCloud qc = q_solve ? subset(*q_solve, stage.query_indices)
                                  : subset(qg, stage.query_indices);
    const PointCloud pc = p_solve ? subset(*p_solve, stage.reference_indices)
                                  : subset(pg, stage.reference_indices);
    auto hyps = sample_hypotheses(stage.field, qc, pc, cfg.n_hypotheses, rng);

    std::size_t best = 0;
    for (std::size_t i = 1; i < hyps.size(); ++i) {
        if (hyps[i].score > hyps[best].score) best = i; // ties keep the lower index
    }
    stage.best = hyps[best];
    stage.correspondences = extract_correspondences(stage.field, cfg.mutual_threshold);
    return stage;
}

} // namespace

CoarseStage run_coarse_stage(const PointCloud& qg, const PointCloud& pg,
                             const PipelineConfig& cfg, std::mt19937_64& rng) {
    return coarse_stage_impl(qg, pg, nullptr, nullptr, cfg, rng);
}

PoseHypothesis coarse_pose(const PointCloud& qg, const PointCloud& pg,
                           const PipelineConfig& cfg, std::mt19937_64& rng) {
    return run_coarse_stage(qg, pg, cfg, rng).best;
}

PoseEstimate fine_pose(const PointCloud& q_aligned, const PointCloud& p,
                       const PipelineConfig& cfg) {
    const auto provider = make_descriptor_provider(cfg.descriptor);
    const std::vector<int> idx_q = farthest_point_sample(q_aligned, cfg.n_fine);
    const std::vector<int> idx_p = farthest_point_sample(p, cfg.n_fine);

    const FeatureSet desc_q = sampled_features(q_aligned, idx_q, cfg, *provider);
    const FeatureSet desc_p = sampled_features(p, idx_p, cfg, *provider);

    // Positional encodings live in a frame shared by both clouds (centered
    // and scaled by the reference) so matching sees the residual offset.
    const Vec3 c = centroid(p);
    const double s = std::max(radius(p, c), 1e-12);
    auto shared_coords = [&](const PointCloud& cloud, const std::vector<int>& idx) {
        PointCloud out;
        out.points.reserve(idx.size());
        for (int i : idx) out.points.push_back((cloud.points[static_cast<std::size_t>(i)] - c) / s);
        return out;
    };
    const FeatureSet pos_q = positional_encoding(shared_coords(q_aligned, idx_q));
    const FeatureSet pos_p = positional_encoding(shared_coords(p, idx_p));

    const CorrelationField field =
        correlate(concat_normalized(desc_q, pos_q), concat_normalized(desc_p, pos_p),
                  desc_q, desc_p, cfg);
    const CorrespondenceSet corr = extract_correspondences(field, cfg.mutual_threshold);
    if (corr.pairs.size() < 3) {
        throw InsufficientCorrespondences("fine_pose: fewer than 3 correspondences");
    }

    std::vector<std::pair<Vec3, Vec3>> pairs;
    std::vector<double> weights;
    pairs.reserve(corr.pairs.size());
    weights.reserve(corr.pairs.size());
    for (const auto& pr : corr.pairs) {
        pairs.emplace_back(
            q_aligned.points[static_cast<std::size_t>(idx_q[static_cast<std::size_t>(pr.query_index - 1)])],
            p.points[static_cast<std::size_t>(idx_p[static_cast<std::size_t>(pr.reference_index - 1)])]);
        weights.push_back(pr.weight);
    }

    PoseEstimate est;
    est.n_correspondences = static_cast<int>(pairs.size());
    const double identity_rms = weighted_rms(pairs, weights, RigidTransform::identity());
    RigidTransform incr = kabsch_weighted(pairs, weights);
    double incr_rms = weighted_rms(pairs, weights, incr);
    if (incr_rms > identity_rms) { // numerical guard: never regress the fit
        incr = RigidTransform::identity();
        incr_rms = identity_rms;
    }
    est.pose = incr;
    est.coarse = RigidTransform::identity();
    est.residual = incr_rms;
    est.coarse_residual = identity_rms;
    return est;
}

PoseEstimate estimate_relative_pose(const PointCloud& q_cam, const PointCloud& p_cam,
                                    const PipelineConfig& cfg, std::mt19937_64& rng) {
    if (q_cam.size() < 3 || p_cam.size() < 3) {
        throw DegenerateGeometry("estimate_relative_pose: need >= 3 points per cloud");
    }
    const FrameTransform grf_q = build_grf(q_cam);
    const FrameTransform grf_p = build_grf(p_cam);
    const PointCloud qg = normalize_to_frame(q_cam, grf_q);
    const PointCloud pg = normalize_to_frame(p_cam, grf_p);

    // Correspondences come from GRF-space features; hypotheses are solved
    // and scored on the camera-frame coordinates of the same index pairs.
    const CoarseStage stage = coarse_stage_impl(qg, pg, &q_cam, &p_cam, cfg, rng);

    // Inliers of the best hypothesis among the extracted correspondences,
    // camera-frame residuals against delta scaled by the reference radius.
    const Mat3 rt = stage.best.pose.rotation.transpose();
    const double inlier_radius = cfg.delta * grf_p.scale;
    std::vector<std::pair<Vec3, Vec3>> cam_pairs;
    std::vector<double> cam_weights;
    for (const auto& pr : stage.correspondences.pairs) {
        const int qi = stage.query_indices[static_cast<std::size_t>(pr.query_index - 1)];
        const int pj = stage.reference_indices[static_cast<std::size_t>(pr.reference_index - 1)];
        const Vec3& q_pt = q_cam.points[static_cast<std::size_t>(qi)];
        const Vec3& p_pt = p_cam.points[static_cast<std::size_t>(pj)];
        const double residual = (rt * (q_pt - stage.best.pose.translation) - p_pt).norm();
        if (residual > inlier_radius) continue;
        cam_pairs.emplace_back(q_pt, p_pt);
        cam_weights.push_back(pr.weight);
    }

    RigidTransform coarse_cam;
    bool solved = false;
    if (cam_pairs.size() >= 3) {
        try {
            coarse_cam = kabsch_weighted(cam_pairs, cam_weights);
            solved = true;
        } catch (const DegenerateGeometry&) {
        }
    }
    if (!solved) {
        // The winning hypothesis is already a camera-frame reference->query
        // map; its inverse is the coarse alignment.
        coarse_cam = inverse(stage.best.pose);
    }

    RigidTransform current = coarse_cam;
    PoseEstimate fine;
    fine.pose = RigidTransform::identity();
    const int iterations = std::max(cfg.fine_iterations, 1);
    for (int it = 0; it < iterations; ++it) {
        const PointCloud q_aligned = apply_rigid(current, q_cam);
        fine = fine_pose(q_aligned, p_cam, cfg);
        current = compose(fine.pose, current);
    }

    PoseEstimate est;
    est.pose = current;
    est.coarse = coarse_cam;
    est.n_correspondences = fine.n_correspondences;
    est.residual = fine.residual;
    est.coarse_residual = fine.coarse_residual;
    return est;
}

PoseEstimate estimate_relative_pose(const PointCloud& q_cam, const PointCloud& p_cam,
                                    const PipelineConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    return estimate_relative_pose(q_cam, p_cam, cfg, rng);
}

} // namespace pairpose
