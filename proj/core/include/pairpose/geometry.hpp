#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "pairpose/errors.hpp"

namespace pairpose {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Point cloud in some Cartesian frame, coordinates in meters.
/// Normals are optional; when present they are unit length and parallel
/// to `points` (same size, same order).
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;

    PointCloud() = default;
    explicit PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) {}

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_normals() const { return !normals.empty(); }
};

/// Rigid SE(3) map x -> rotation * x + translation.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

    static RigidTransform identity() { return {}; }
};

/// 7DoF similarity frame: x_local = rotation^T * (x - translation) / scale.
struct FrameTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    double scale = 1.0;

    Vec3 to_frame(const Vec3& x) const {
        return rotation.transpose() * (x - translation) / scale;
    }
    Vec3 from_frame(const Vec3& x) const {
        return rotation * (x * scale) + translation;
    }
};

struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
};

/// Row-major depth image, meters. Value 0 marks an invalid pixel.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;

    float at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
};

/// Row-major binary mask; nonzero = selected.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    bool at(int u, int v) const { return bits[static_cast<std::size_t>(v) * width + u] != 0; }
    std::size_t count() const;
};

// --- basic statistics -------------------------------------------------------

/// Arithmetic mean of the points. Cloud must be non-empty.
Vec3 centroid(const PointCloud& cloud);

/// Maximum distance from `center` to any point.
double radius(const PointCloud& cloud, const Vec3& center);

/// Population covariance (1/N) * sum (q - c)(q - c)^T.
Mat3 covariance(const PointCloud& cloud);

// --- transforms -------------------------------------------------------------

PointCloud apply_rigid(const RigidTransform& t, const PointCloud& cloud);
RigidTransform compose(const RigidTransform& a, const RigidTransform& b); // a after b
RigidTransform inverse(const RigidTransform& t);

// --- back-projection --------------------------------------------------------

/// Pinhole back-projection of masked valid-depth pixels, row-major scan order.
/// Throws EmptySelection when no masked pixel has depth > 0, and
/// DimensionMismatch when mask and depth dimensions differ.
PointCloud back_project(const DepthMap& depth, const BinaryMask& mask,
                        const CameraIntrinsics& k);

/// Pinhole projection to pixel coordinates (u, v). Point must have z > 0.
Eigen::Vector2d project(const CameraIntrinsics& k, const Vec3& x);

} // namespace pairpose
