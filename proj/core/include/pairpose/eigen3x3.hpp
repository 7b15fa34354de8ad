#pragma once

#include <Eigen/Core>

namespace pairpose {

struct Eigen3Result {
    Eigen::Vector3d eigenvalues;  // ascending
    Eigen::Matrix3d eigenvectors; // columns, unit, mutually orthogonal
};

/// Eigen-decomposition of a symmetric 3x3 matrix.
///
/// Uses the closed-form trigonometric solution for the eigenvalues and
/// cross-product elimination for the eigenvectors; switches to cyclic
/// Jacobi rotations when eigenvalue gaps fall below 1e-12 relative to the
/// matrix scale. Eigenvectors are sign-canonicalized so the first
/// component with magnitude above 1e-12 is positive.
Eigen3Result symmetric_eigen3(const Eigen::Matrix3d& m);

} // namespace pairpose
