#include "pairpose/frame.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pairpose/eigen3x3.hpp"

namespace pairpose {
namespace {

Mat3 second_moment(const PointCloud& cloud, const Vec3& center) {
    Mat3 acc = Mat3::Zero();
    for (const auto& p : cloud.points) {
        const Vec3 d = p - center;
        acc += d * d.transpose();
    }
    return acc / static_cast<double>(cloud.size());
}

double resolve_radius(const PointCloud& cloud, const FrameConfig& cfg) {
    if (cfg.local_radius > 0.0) return cfg.local_radius;
    return cfg.local_radius_frac * radius(cloud, centroid(cloud));
}

LocalRegion region_of(const PointCloud& cloud, int center, double r, int n_neighbors) {
    const std::size_t n = cloud.size();
    const Vec3& c = cloud.points[static_cast<std::size_t>(center)];
    std::vector<std::pair<double, int>> by_dist;
    by_dist.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        by_dist.emplace_back((cloud.points[j] - c).norm(), static_cast<int>(j));
    }
    const std::size_t k = std::min<std::size_t>(n, static_cast<std::size_t>(n_neighbors));
    std::partial_sort(by_dist.begin(), by_dist.begin() + static_cast<std::ptrdiff_t>(k),
                      by_dist.end());

    LocalRegion region;
    region.center_index = center;
    for (std::size_t j = 0; j < k; ++j) {
        if (by_dist[j].first <= r) region.member_indices.push_back(by_dist[j].second);
    }
    if (region.member_indices.size() < 3) {
        // 3 nearest others plus the center, regardless of r
        region.knn_fallback = true;
        region.member_indices.clear();
        const std::size_t take = std::min<std::size_t>(n, 4);
        for (std::size_t j = 0; j < take; ++j) {
            region.member_indices.push_back(by_dist[j].second);
        }
    }
    return region;
}

} // namespace

Vec3 center_normal(const PointCloud& cloud, const Vec3& center) {
    if (cloud.size() < 3) throw DegenerateGeometry("center_normal: fewer than 3 points");

    const Eigen3Result eig = symmetric_eigen3(second_moment(cloud, center));
    if (eig.eigenvalues[1] <= 1e-10 * std::max(eig.eigenvalues[2], 1e-30)) {
        throw DegenerateGeometry("center_normal: collinear points");
    }
    Vec3 n = eig.eigenvectors.col(0);

    const double n_pts = static_cast<double>(cloud.size());
    const double s = radius(cloud, center);
    Vec3 dev = Vec3::Zero();
    for (const auto& p : cloud.points) dev += center - p;
    const double dot = n.dot(dev);
    const double dot_tol = 1e-9 * n_pts * std::max(s, 1e-30);
    if (dot > dot_tol) return n;
    if (dot < -dot_tol) return -n;

    // Tie: the sum vanishes whenever center is the centroid. Orient by the
    // third moment along n, which is equivariant under rotation and scale.
    double skew = 0.0;
    for (const auto& p : cloud.points) {
        const double t = n.dot(p - center);
        skew += t * t * t;
    }
    const double skew_tol = 1e-12 * n_pts * std::max(s * s * s, 1e-30);
    if (skew > skew_tol) return n;
    if (skew < -skew_tol) return -n;
    return n; // symmetric along n: keep the canonicalized eigenvector
}

Vec3 grf_x_axis(const PointCloud& cloud, const Vec3& center, const Vec3& normal) {
    const double s = radius(cloud, center);
    if (s < 1e-300) throw DegenerateGeometry("grf_x_axis: zero-radius cloud");
    // Work on coordinates scaled by 1/s so the degeneracy threshold is
    // dimensionless; positive scaling leaves the direction unchanged.
    Vec3 sum = Vec3::Zero();
    for (const auto& p : cloud.points) {
        const Vec3 d = (p - center) / s;
        const double along = normal.dot(d);
        const Vec3 v = d - along * normal;
        const double w1 = (1.0 - d.norm()) * (1.0 - d.norm());
        const double w2 = along * along;
        sum += w1 * w2 * v;
    }
    const double norm = sum.norm();
    if (norm < 1e-10) {
        throw DegenerateGeometry("grf_x_axis: weighted tangent sum has no direction");
    }
    return sum / norm;
}

namespace {

FrameTransform build_frame(const PointCloud& cloud, bool tangent_fallback) {
    if (cloud.size() < 3) throw DegenerateGeometry("build_frame: fewer than 3 points");
    const Vec3 c = centroid(cloud);
    const double s = radius(cloud, c);
    if (s < 1e-12) throw ZeroScale("build_frame: cloud radius below 1e-12");

    const Vec3 z = center_normal(cloud, c);
    Vec3 x;
    try {
        x = grf_x_axis(cloud, c, z);
    } catch (const DegenerateGeometry&) {
        if (!tangent_fallback) throw;
        // Rotationally symmetric about z: use a fixed tangent direction.
        Vec3 seed = Vec3::UnitX();
        Vec3 proj = seed - z.dot(seed) * z;
        if (proj.norm() < 1e-10) {
            seed = Vec3::UnitY();
            proj = seed - z.dot(seed) * z;
        }
        x = proj.normalized();
    }
    const Vec3 y = z.cross(x);

    FrameTransform frame;
    frame.rotation.col(0) = x;
    frame.rotation.col(1) = y;
    frame.rotation.col(2) = z;
    frame.translation = c;
    frame.scale = s;
    return frame;
}

} // namespace

FrameTransform build_grf(const PointCloud& cloud) { return build_frame(cloud, true); }

PointCloud normalize_to_frame(const PointCloud& cloud, const FrameTransform& frame) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(frame.to_frame(p));
    if (cloud.has_normals()) {
        out.normals.reserve(cloud.normals.size());
        for (const auto& n : cloud.normals) {
            out.normals.push_back(frame.rotation.transpose() * n);
        }
    }
    return out;
}

PointCloud denormalize_from_frame(const PointCloud& cloud, const FrameTransform& frame) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(frame.from_frame(p));
    if (cloud.has_normals()) {
        out.normals.reserve(cloud.normals.size());
        for (const auto& n : cloud.normals) out.normals.push_back(frame.rotation * n);
    }
    return out;
}

std::vector<LocalRegion> local_regions(const PointCloud& cloud, const FrameConfig& cfg) {
    std::vector<int> all(cloud.size());
    std::iota(all.begin(), all.end(), 0);
    return regions_for_centers(cloud, all, cfg);
}

std::vector<LocalRegion> regions_for_centers(const PointCloud& cloud,
                                             const std::vector<int>& centers,
                                             const FrameConfig& cfg) {
    if (cloud.empty()) throw EmptySelection("local_regions: empty cloud");
    const double r = resolve_radius(cloud, cfg);
    std::vector<LocalRegion> regions;
    regions.reserve(centers.size());
    for (int c : centers) regions.push_back(region_of(cloud, c, r, cfg.n_neighbors));
    return regions;
}

FrameTransform build_lrf(const PointCloud& cloud, const LocalRegion& region) {
    PointCloud sub;
    sub.points.reserve(region.member_indices.size());
    for (int idx : region.member_indices) {
        sub.points.push_back(cloud.points[static_cast<std::size_t>(idx)]);
    }
    // No tangent fallback here: degenerate local geometry must surface so
    // descriptor extraction can switch to its fallback path.
    return build_frame(sub, false);
}

std::optional<FrameTransform> try_build_lrf(const PointCloud& cloud,
                                            const LocalRegion& region) {
    try {
        return build_lrf(cloud, region);
    } catch (const DegenerateGeometry&) {
        return std::nullopt;
    } catch (const ZeroScale&) {
        return std::nullopt;
    }
}

std::vector<std::vector<Vec3>> lrf_normalize(
    const PointCloud& cloud, const std::vector<LocalRegion>& regions,
    const std::vector<std::optional<FrameTransform>>& frames) {
    if (regions.size() != frames.size()) {
        throw DimensionMismatch("lrf_normalize: regions/frames size mismatch");
    }
    std::vector<std::vector<Vec3>> out(regions.size());
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (!frames[i]) continue;
        out[i].reserve(regions[i].member_indices.size());
        for (int idx : regions[i].member_indices) {
            out[i].push_back(frames[i]->to_frame(cloud.points[static_cast<std::size_t>(idx)]));
        }
    }
    return out;
}

} // namespace pairpose
