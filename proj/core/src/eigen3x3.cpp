#include "pairpose/eigen3x3.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>

namespace pairpose {
namespace {

void sign_canonicalize(Eigen::Vector3d& v) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0.0) v = -v;
            return;
        }
    }
}

// Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric form of
// the characteristic cubic), returned ascending.
Eigen::Vector3d analytic_eigenvalues(const Eigen::Matrix3d& a) {
    const double q = a.trace() / 3.0;
    Eigen::Matrix3d b = a - q * Eigen::Matrix3d::Identity();
    const double p2 = (b.array() * b.array()).sum() / 6.0;
    const double p = std::sqrt(std::max(p2, 0.0));
    if (p < 1e-300) {
        return Eigen::Vector3d::Constant(q);
    }
    const double det_b = b.determinant();
    double r = det_b / (2.0 * p * p * p);
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double l1 = q + 2.0 * p * std::cos(phi);
    const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double l2 = 3.0 * q - l1 - l3;
    Eigen::Vector3d vals(l3, l2, l1);
    std::sort(vals.data(), vals.data() + 3);
    return vals;
}

// Eigenvector for a known eigenvalue via the two most independent rows of
// (a - lambda I). Returns false when the cross products are too small to
// pick a direction reliably.
bool eigenvector_for(const Eigen::Matrix3d& a, double lambda, double scale,
                     Eigen::Vector3d& out) {
    Eigen::Matrix3d m = a - lambda * Eigen::Matrix3d::Identity();
    std::array<Eigen::Vector3d, 3> rows = {m.row(0).transpose(), m.row(1).transpose(),
                                           m.row(2).transpose()};
    std::array<Eigen::Vector3d, 3> crosses = {rows[0].cross(rows[1]),
                                              rows[0].cross(rows[2]),
                                              rows[1].cross(rows[2])};
    int best = 0;
    double best_norm = crosses[0].norm();
    for (int i = 1; i < 3; ++i) {
        const double n = crosses[i].norm();
        if (n > best_norm) {
            best = i;
            best_norm = n;
        }
    }
    if (best_norm <= 1e-14 * scale * scale) return false;
    out = crosses[best] / best_norm;
    return true;
}

// Cyclic Jacobi for symmetric 3x3; robust for (near-)repeated eigenvalues.
Eigen3Result jacobi_eigen3(const Eigen::Matrix3d& m) {
    Eigen::Matrix3d a = m;
    Eigen::Matrix3d v = Eigen::Matrix3d::Identity();
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
        if (off < 1e-60) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
                rot(p, p) = c;
                rot(q, q) = c;
                rot(p, q) = s;
                rot(q, p) = -s;
                a = rot.transpose() * a * rot;
                v = v * rot;
            }
        }
    }
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a(i, i) < a(j, j); });
    Eigen3Result r;
    for (int i = 0; i < 3; ++i) {
        r.eigenvalues[i] = a(order[i], order[i]);
        Eigen::Vector3d col = v.col(order[i]);
        col.normalize();
        sign_canonicalize(col);
        r.eigenvectors.col(i) = col;
    }
    return r;
}

} // namespace

Eigen3Result symmetric_eigen3(const Eigen::Matrix3d& m) {
    const Eigen::Matrix3d a = 0.5 * (m + m.transpose()); // symmetrize
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);

    const Eigen::Vector3d vals = analytic_eigenvalues(a);
    const double gap_lo = vals[1] - vals[0];
    const double gap_hi = vals[2] - vals[1];
    if (gap_lo < 1e-12 * scale || gap_hi < 1e-12 * scale) {
        return jacobi_eigen3(a);
    }

    Eigen3Result r;
    r.eigenvalues = vals;
    Eigen::Vector3d v0, v2;
    if (!eigenvector_for(a, vals[0], scale, v0) ||
        !eigenvector_for(a, vals[2], scale, v2)) {
        return jacobi_eigen3(a);
    }
    // Re-orthogonalize and derive the middle vector so the triple is exactly
    // orthonormal even when the analytic vectors carry rounding error.
    v2 = (v2 - v2.dot(v0) * v0).normalized();
    Eigen::Vector3d v1 = v2.cross(v0).normalized();

    sign_canonicalize(v0);
    sign_canonicalize(v1);
    sign_canonicalize(v2);
    r.eigenvectors.col(0) = v0;
    r.eigenvectors.col(1) = v1;
    r.eigenvectors.col(2) = v2;

    // Residual check; fall back if the closed form lost too much precision.
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        worst = std::max(worst,
                         (a * r.eigenvectors.col(i) -
                          r.eigenvalues[i] * r.eigenvectors.col(i))
                             .norm());
    }
    if (worst > 1e-9 * scale) return jacobi_eigen3(a);
    return r;
}

} // namespace pairpose
