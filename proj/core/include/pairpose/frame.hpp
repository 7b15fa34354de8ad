#pragma once

#include <optional>
#include <vector>

#include "pairpose/geometry.hpp"

namespace pairpose {

/// Neighborhood parameters for local frame construction.
/// `local_radius` in input units wins when positive; otherwise the radius
/// resolves to `local_radius_frac` times the cloud radius.
struct FrameConfig {
    int n_neighbors = 64;          // N_D
    double local_radius = 0.0;     // absolute, 0 = unset
    double local_radius_frac = 0.3;
};

/// Index set of a point's neighborhood; contains its center.
struct LocalRegion {
    int center_index = 0;
    std::vector<int> member_indices;
    bool knn_fallback = false; // radius cut left < 3 members, 3-NN used instead
};

/// Unit normal at `center`: the covariance eigenvector of the smallest
/// eigenvalue, oriented by the sign of n . sum(center - q).
///
/// When center is the cloud centroid that sum vanishes identically, so the
/// orientation falls through to the sign of the third moment sum((n.(q-c))^3),
/// which is rotation-equivariant; when that is zero too (symmetric shapes)
/// the sign-canonicalized eigenvector is returned unchanged.
Vec3 center_normal(const PointCloud& cloud, const Vec3& center);

/// Principal tangent direction: the normalized weighted sum of tangent-plane
/// projections of (q - center), weights (s - |q-c|)^2 * (n.(q-c))^2.
/// Throws DegenerateGeometry when the weighted sum has no usable direction.
Vec3 grf_x_axis(const PointCloud& cloud, const Vec3& center, const Vec3& normal);

/// Global reference frame: translation = centroid, scale = max radius,
/// rotation columns [x | y | z] with z the center normal, x the principal
/// tangent direction and y = z cross x. When the tangent direction is
/// degenerate (rotationally symmetric cloud) x falls back to the projection
/// of +X (or +Y) onto the tangent plane.
FrameTransform build_grf(const PointCloud& cloud);

PointCloud normalize_to_frame(const PointCloud& cloud, const FrameTransform& frame);
PointCloud denormalize_from_frame(const PointCloud& cloud, const FrameTransform& frame);

/// Per-point neighborhoods: the N_D nearest neighbors of each point
/// intersected with the radius ball, 3-NN fallback when fewer than 3 survive.
std::vector<LocalRegion> local_regions(const PointCloud& cloud, const FrameConfig& cfg);

/// Same construction restricted to the given center indices.
std::vector<LocalRegion> regions_for_centers(const PointCloud& cloud,
                                             const std::vector<int>& centers,
                                             const FrameConfig& cfg);

/// Local reference frame of one region, built exactly like the GRF on the
/// member subset. Throws DegenerateGeometry for collinear/symmetric regions.
FrameTransform build_lrf(const PointCloud& cloud, const LocalRegion& region);

std::optional<FrameTransform> try_build_lrf(const PointCloud& cloud,
                                            const LocalRegion& region);

/// Member coordinates of each region expressed in its local frame
/// (centroid 0, max norm 1). Regions without a frame yield an empty set.
std::vector<std::vector<Vec3>> lrf_normalize(
    const PointCloud& cloud, const std::vector<LocalRegion>& regions,
    const std::vector<std::optional<FrameTransform>>& frames);

} // namespace pairpose
