#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pairpose/frame.hpp"
#include "pairpose/geometry.hpp"

namespace pairpose {

/// One descriptor row per point (or per region when computed for a subset).
/// Row 0 is the background token only after add_background_row.
struct FeatureSet {
    Eigen::MatrixXd rows;

    Eigen::Index count() const { return rows.rows(); }
    Eigen::Index dim() const { return rows.cols(); }
};

struct DescriptorProviderSpec {
    std::string provider = "baseline";
    std::map<std::string, std::string> parameters;
};

class DescriptorProvider {
public:
    virtual ~DescriptorProvider() = default;

    /// One row per region. `lrf_sets[i]` holds region i's members in its
    /// local frame; an empty set marks a degenerate frame and selects the
    /// provider's fallback path.
    virtual FeatureSet describe(const PointCloud& grf_cloud,
                                const std::vector<LocalRegion>& regions,
                                const std::vector<std::vector<Vec3>>& lrf_sets) const = 0;

    virtual Eigen::Index dim() const = 0;
};

/// Factory for registered providers: "baseline" (LRF occupancy grid, params
/// "dim") and "file" (replays an externally computed matrix, params "bin"
/// and "json"). Throws ConfigError for unknown ids.
std::unique_ptr<DescriptorProvider> make_descriptor_provider(const DescriptorProviderSpec& spec);

/// Baseline descriptor: each region's LRF-normalized members binned into a
/// 4x4x4 occupancy grid over [-1,1]^3, tiled up to `dim` and L2-normalized.
/// Degenerate regions fall back to a 16-bin radial distance histogram.
FeatureSet describe_points(const PointCloud& grf_cloud,
                           const std::vector<LocalRegion>& regions,
                           const std::vector<std::vector<Vec3>>& lrf_sets,
                           Eigen::Index dim = 256);

/// Mean of the point descriptors, re-normalized to unit norm.
Eigen::VectorXd describe_global(const PointCloud& grf_cloud, const FeatureSet& features);

/// a.b / (|a||b|). Throws ZeroVector when either input has no direction.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Sinusoidal encoding of (x,y,z) at 8 octave frequencies, 48 dims,
/// scaled so every row has unit norm.
FeatureSet positional_encoding(const PointCloud& cloud);

/// Prepends the fixed background-token row (first basis direction).
FeatureSet add_background_row(const FeatureSet& features);

} // namespace pairpose
