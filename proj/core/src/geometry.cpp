#include "pairpose/geometry.hpp"

#include <cmath>

namespace pairpose {

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (auto b : bits) n += (b != 0);
    return n;
}

Vec3 centroid(const PointCloud& cloud) {
    Vec3 sum = Vec3::Zero();
    for (const auto& p : cloud.points) sum += p;
    return sum / static_cast<double>(cloud.size());
}

double radius(const PointCloud& cloud, const Vec3& center) {
    double r2 = 0.0;
    for (const auto& p : cloud.points) r2 = std::max(r2, (p - center).squaredNorm());
    return std::sqrt(r2);
}

Mat3 covariance(const PointCloud& cloud) {
    const Vec3 c = centroid(cloud);
    Mat3 acc = Mat3::Zero();
    for (const auto& p : cloud.points) {
        const Vec3 d = p - c;
        acc += d * d.transpose();
    }
    return acc / static_cast<double>(cloud.size());
}

PointCloud apply_rigid(const RigidTransform& t, const PointCloud& cloud) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
    if (cloud.has_normals()) {
        out.normals.reserve(cloud.normals.size());
        for (const auto& n : cloud.normals) out.normals.push_back(t.rotation * n);
    }
    return out;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform r;
    r.rotation = a.rotation * b.rotation;
    r.translation = a.rotation * b.translation + a.translation;
    return r;
}

RigidTransform inverse(const RigidTransform& t) {
    RigidTransform r;
    r.rotation = t.rotation.transpose();
    r.translation = -(t.rotation.transpose() * t.translation);
    return r;
}

PointCloud back_project(const DepthMap& depth, const BinaryMask& mask,
                        const CameraIntrinsics& k) {
    if (depth.width != mask.width || depth.height != mask.height) {
        throw DimensionMismatch("back_project: mask dimensions differ from depth");
    }
    PointCloud out;
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            if (!mask.at(u, v)) continue;
            const double d = depth.at(u, v);
            if (d <= 0.0) continue;
            out.points.emplace_back(d * (u - k.cx) / k.fx, d * (v - k.cy) / k.fy, d);
        }
    }
    if (out.empty()) throw EmptySelection("back_project: no masked pixel with valid depth");
    return out;
}

Eigen::Vector2d project(const CameraIntrinsics& k, const Vec3& x) {
    return {k.fx * x.x() / x.z() + k.cx, k.fy * x.y() / x.z() + k.cy};
}

} // namespace pairpose
