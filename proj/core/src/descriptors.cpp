#include "pairpose/descriptors.hpp"

#include <cmath>

#include "pairpose/cloud_io.hpp"

namespace pairpose {
namespace {

constexpr int kGridSide = 4;
constexpr int kGridCells = kGridSide * kGridSide * kGridSide;
constexpr int kHistBins = 16;
constexpr int kPosFrequencies = 8;

Eigen::VectorXd tile_normalized(const Eigen::VectorXd& base, Eigen::Index dim) {
    Eigen::VectorXd out(dim);
    for (Eigen::Index k = 0; k < dim; ++k) out[k] = base[k % base.size()];
    const double norm = out.norm();
    if (norm < 1e-12) return Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(double(dim)));
    return out / norm;
}

Eigen::VectorXd occupancy_descriptor(const std::vector<Vec3>& local_set, Eigen::Index dim) {
    Eigen::VectorXd cells = Eigen::VectorXd::Zero(kGridCells);
    for (const auto& p : local_set) {
        auto bin = [](double v) {
            int b = static_cast<int>((v + 1.0) * 0.5 * kGridSide);
            return std::clamp(b, 0, kGridSide - 1);
        };
        cells[bin(p.x()) * kGridSide * kGridSide + bin(p.y()) * kGridSide + bin(p.z())] += 1.0;
    }
    return tile_normalized(cells, dim);
}

Eigen::VectorXd radial_descriptor(const PointCloud& cloud, const LocalRegion& region,
                                  Eigen::Index dim) {
    const Vec3& c = cloud.points[static_cast<std::size_t>(region.center_index)];
    double max_dist = 0.0;
    for (int idx : region.member_indices) {
        max_dist = std::max(max_dist, (cloud.points[static_cast<std::size_t>(idx)] - c).norm());
    }
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(kHistBins);
    if (max_dist < 1e-300) {
        return Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(double(dim)));
    }
    for (int idx : region.member_indices) {
        const double d = (cloud.points[static_cast<std::size_t>(idx)] - c).norm() / max_dist;
        const int b = std::clamp(static_cast<int>(d * kHistBins), 0, kHistBins - 1);
        hist[b] += 1.0;
    }
    return tile_normalized(hist, dim);
}

class BaselineProvider final : public DescriptorProvider {
public:
    explicit BaselineProvider(Eigen::Index dim) : dim_(dim) {}

    FeatureSet describe(const PointCloud& grf_cloud,
                        const std::vector<LocalRegion>& regions,
                        const std::vector<std::vector<Vec3>>& lrf_sets) const override {
        return describe_points(grf_cloud, regions, lrf_sets, dim_);
    }

    Eigen::Index dim() const override { return dim_; }

private:
    Eigen::Index dim_;
};

class FileProvider final : public DescriptorProvider {
public:
    FileProvider(const std::string& bin, const std::string& json)
        : rows_(io::read_matrix(bin, json)) {}

    FeatureSet describe(const PointCloud&, const std::vector<LocalRegion>& regions,
                        const std::vector<std::vector<Vec3>>&) const override {
        if (rows_.rows() != static_cast<Eigen::Index>(regions.size())) {
            throw DimensionMismatch("file provider: row count differs from region count");
        }
        return FeatureSet{rows_};
    }

    Eigen::Index dim() const override { return rows_.cols(); }

private:
    Eigen::MatrixXd rows_;
};

} // namespace

std::unique_ptr<DescriptorProvider> make_descriptor_provider(const DescriptorProviderSpec& spec) {
    if (spec.provider == "baseline") {
        Eigen::Index dim = 256;
        if (auto it = spec.parameters.find("dim"); it != spec.parameters.end()) {
            dim = std::stol(it->second);
            if (dim < 1) throw ConfigError("descriptor dim must be >= 1");
        }
        return std::make_unique<BaselineProvider>(dim);
    }
    if (spec.provider == "file") {
        const auto bin = spec.parameters.find("bin");
        const auto json = spec.parameters.find("json");
        if (bin == spec.parameters.end() || json == spec.parameters.end()) {
            throw ConfigError("file provider needs 'bin' and 'json' parameters");
        }
        return std::make_unique<FileProvider>(bin->second, json->second);
    }
    throw ConfigError("unknown descriptor provider '" + spec.provider + "'");
}

FeatureSet describe_points(const PointCloud& grf_cloud,
                           const std::vector<LocalRegion>& regions,
                           const std::vector<std::vector<Vec3>>& lrf_sets,
                           Eigen::Index dim) {
    if (regions.size() != lrf_sets.size()) {
        throw DimensionMismatch("describe_points: regions/lrf_sets size mismatch");
    }
    FeatureSet fs;
    fs.rows.resize(static_cast<Eigen::Index>(regions.size()), dim);
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (!lrf_sets[i].empty()) {
            fs.rows.row(static_cast<Eigen::Index>(i)) = occupancy_descriptor(lrf_sets[i], dim);
        } else {
            fs.rows.row(static_cast<Eigen::Index>(i)) =
                radial_descriptor(grf_cloud, regions[i], dim);
        }
    }
    return fs;
}

Eigen::VectorXd describe_global(const PointCloud&, const FeatureSet& features) {
    if (features.count() == 0) throw EmptySelection("describe_global: no features");
    Eigen::VectorXd mean = features.rows.colwise().mean();
    const double norm = mean.norm();
    if (norm < 1e-12) throw ZeroVector("describe_global: mean descriptor has no direction");
    return mean / norm;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw DimensionMismatch("cosine_similarity: size mismatch");
    const double na = a.norm();
    const double nb = b.norm();
    if (na < 1e-150 || nb < 1e-150) throw ZeroVector("cosine_similarity: zero vector");
    return a.dot(b) / (na * nb);
}

FeatureSet positional_encoding(const PointCloud& cloud) {
    const Eigen::Index dim = 3 * kPosFrequencies * 2;
    // sin^2 + cos^2 = 1 per (coord, frequency), so each raw row has norm
    // sqrt(3 * kPosFrequencies); divide it out to get unit rows.
    const double inv_norm = 1.0 / std::sqrt(3.0 * kPosFrequencies);
    FeatureSet fs;
    fs.rows.resize(static_cast<Eigen::Index>(cloud.size()), dim);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        Eigen::Index k = 0;
        for (int axis = 0; axis < 3; ++axis) {
            const double v = cloud.points[i][axis];
            for (int f = 0; f < kPosFrequencies; ++f) {
                const double w = std::ldexp(M_PI, f) * v; // 2^f * pi * v
                fs.rows(static_cast<Eigen::Index>(i), k++) = std::sin(w) * inv_norm;
                fs.rows(static_cast<Eigen::Index>(i), k++) = std::cos(w) * inv_norm;
            }
        }
    }
    return fs;
}

FeatureSet add_background_row(const FeatureSet& features) {
    FeatureSet out;
    out.rows.resize(features.count() + 1, features.dim());
    out.rows.row(0).setZero();
    out.rows(0, 0) = 1.0;
    out.rows.bottomRows(features.count()) = features.rows;
    return out;
}

} // namespace pairpose
