#pragma once

// Shared generators and independent oracles. Oracles are deliberately
// written as plain loops against the formulas, not by calling the library
// paths they are meant to check.

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <random>

#include "pairpose/frame.hpp"
#include "pairpose/geometry.hpp"

namespace testsupport {

using pairpose::Mat3;
using pairpose::PointCloud;
using pairpose::RigidTransform;
using pairpose::Vec3;

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (;;) {
        Vec3 v(g(rng), g(rng), g(rng));
        if (v.norm() > 1e-9) return v.normalized();
    }
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(0.0, M_PI);
    return Eigen::AngleAxisd(angle(rng), random_unit(rng)).toRotationMatrix();
}

inline RigidTransform random_rigid(std::mt19937_64& rng, double translation_scale = 1.0) {
    std::uniform_real_distribution<double> u(-translation_scale, translation_scale);
    RigidTransform t;
    t.rotation = random_rotation(rng);
    t.translation = Vec3(u(rng), u(rng), u(rng));
    return t;
}

/// Gaussian blob cloud; generic position (asymmetric almost surely).
inline PointCloud random_cloud(std::mt19937_64& rng, int n, double spread = 1.0) {
    std::normal_distribution<double> g(0.0, spread);
    PointCloud c;
    c.points.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) c.points.emplace_back(g(rng), g(rng), g(rng));
    return c;
}

/// Anisotropically stretched and skew-biased cloud: distinct covariance
/// eigenvalues and a clearly nonzero third moment along the flat axis.
inline PointCloud skewed_cloud(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PointCloud c;
    c.points.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double z = g(rng) * 0.25;
        z += 0.35 * z * z; // bend one side
        c.points.emplace_back(g(rng) * 1.6 + 0.2 * u(rng), g(rng) * 0.9, z);
    }
    return c;
}

// --- independent GRF oracle -------------------------------------------------

/// Line-by-line re-implementation of the global frame construction using
/// Eigen's eigensolver and straight loops, including the documented
/// orientation fallbacks.
inline pairpose::FrameTransform grf_oracle(const PointCloud& cloud) {
    const int n = static_cast<int>(cloud.size());
    Vec3 c = Vec3::Zero();
    for (const auto& p : cloud.points) c += p;
    c /= n;

    double s = 0.0;
    for (const auto& p : cloud.points) s = std::max(s, (p - c).norm());

    Mat3 cov = Mat3::Zero();
    for (const auto& p : cloud.points) cov += (p - c) * (p - c).transpose();
    cov /= n;
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    Vec3 z = eig.eigenvectors().col(0);
    for (int i = 0; i < 3; ++i) { // lexicographic canonicalization
        if (std::abs(z[i]) > 1e-12) {
            if (z[i] < 0.0) z = -z;
            break;
        }
    }
    Vec3 dev = Vec3::Zero();
    for (const auto& p : cloud.points) dev += c - p;
    const double dot = z.dot(dev);
    const double dot_tol = 1e-9 * n * std::max(s, 1e-30);
    if (dot > dot_tol) {
        // keep
    } else if (dot < -dot_tol) {
        z = -z;
    } else {
        double skew = 0.0;
        for (const auto& p : cloud.points) {
            const double t = z.dot(p - c);
            skew += t * t * t;
        }
        const double skew_tol = 1e-12 * n * std::max(s * s * s, 1e-30);
        if (skew < -skew_tol) z = -z;
    }

    Vec3 sum = Vec3::Zero();
    for (const auto& p : cloud.points) {
        const Vec3 d = (p - c) / s;
        const double along = z.dot(d);
        const Vec3 v = d - along * z;
        sum += (1.0 - d.norm()) * (1.0 - d.norm()) * along * along * v;
    }
    Vec3 x;
    if (sum.norm() < 1e-10) {
        Vec3 seed = Vec3::UnitX();
        Vec3 proj = seed - z.dot(seed) * z;
        if (proj.norm() < 1e-10) {
            seed = Vec3::UnitY();
            proj = seed - z.dot(seed) * z;
        }
        x = proj.normalized();
    } else {
        x = sum.normalized();
    }
    const Vec3 y = z.cross(x);

    pairpose::FrameTransform f;
    f.rotation.col(0) = x;
    f.rotation.col(1) = y;
    f.rotation.col(2) = z;
    f.translation = c;
    f.scale = s;
    return f;
}

inline double rms_diff(const PointCloud& a, const PointCloud& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a.points[i] - b.points[i]).squaredNorm();
    return std::sqrt(acc / static_cast<double>(a.size()));
}

inline double rotation_angle_quaternion(const Mat3& ra, const Mat3& rb) {
    const Eigen::Quaterniond qa(ra), qb(rb);
    const double d = std::min(std::abs(qa.dot(qb)), 1.0);
    return 2.0 * std::acos(d) * 180.0 / M_PI;
}

/// Geodesic angle in radians via |R_a - R_b|_F = 2 sqrt(2) |sin(theta/2)|;
/// well-conditioned near zero where acos-based forms bottom out at ~3e-8.
inline double rotation_angle_rad(const Mat3& ra, const Mat3& rb) {
    const double f = (ra - rb).norm() / (2.0 * std::sqrt(2.0));
    return 2.0 * std::asin(std::min(f, 1.0));
}

} // namespace testsupport
