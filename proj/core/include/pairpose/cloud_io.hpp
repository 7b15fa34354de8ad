#pragma once

#include <Eigen/Core>
#include <string>

#include "pairpose/geometry.hpp"

namespace pairpose::io {

// ASCII PLY 1.0, element vertex with float properties x y z and optional
// nx ny nz. Other elements/properties are rejected on read.
PointCloud read_ply(const std::string& path);
void write_ply(const std::string& path, const PointCloud& cloud);

// Raw little-endian float32 depth, row-major, with a JSON sidecar holding
// { "width", "height", "fx", "fy", "cx", "cy" }.
void read_depth(const std::string& bin_path, const std::string& json_path,
                DepthMap& depth, CameraIntrinsics& k);
void write_depth(const std::string& bin_path, const std::string& json_path,
                 const DepthMap& depth, const CameraIntrinsics& k);

// PGM (P5) masks, nonzero = selected.
BinaryMask read_pgm_mask(const std::string& path);
void write_pgm_mask(const std::string& path, const BinaryMask& mask);

// Row-major little-endian float32 matrix with a JSON sidecar
// { "rows": N, "cols": d }; used by the file descriptor provider.
Eigen::MatrixXd read_matrix(const std::string& bin_path, const std::string& json_path);
void write_matrix(const std::string& bin_path, const std::string& json_path,
                  const Eigen::MatrixXd& m);

} // namespace pairpose::io
