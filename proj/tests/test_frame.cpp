#include <doctest.h>

#include "pairpose/frame.hpp"
#include "test_support.hpp"

using namespace pairpose;
using namespace testsupport;

TEST_CASE("center_normal planar symmetric tie-break") {
    // Symmetric planar cloud: the orientation sum and the skew both vanish,
    // so the canonicalized eigenvector (+z) must come back deterministically.
    PointCloud cloud{{Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0),
                      Vec3(0.5, 0.5, 0), Vec3(-0.5, -0.5, 0)}};
    const Vec3 n1 = center_normal(cloud, centroid(cloud));
    const Vec3 n2 = center_normal(cloud, centroid(cloud));
    CHECK((n1 - Vec3(0, 0, 1)).norm() < 1e-9);
    CHECK((n1 - n2).norm() == 0.0);
}

TEST_CASE("center_normal sign rule on a hemisphere shell about the sphere center") {
    std::mt19937_64 rng(31);
    PointCloud shell;
    while (shell.size() < 300) {
        const Vec3 v = random_unit(rng);
        if (v.z() > 0.15) shell.points.push_back(v);
    }
    const Vec3 center(0, 0, 0); // sphere center, not the shell centroid
    const Vec3 n = center_normal(shell, center);

    // Direct evaluation of the orientation condition
    Vec3 dev = Vec3::Zero();
    for (const auto& p : shell.points) dev += center - p;
    CHECK(n.dot(dev) > 0.0);
}

TEST_CASE("center_normal equivariance under rotation") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const PointCloud cloud = skewed_cloud(rng, 120);
        const Vec3 n = center_normal(cloud, centroid(cloud));

        RigidTransform t = random_rigid(rng);
        const PointCloud moved = apply_rigid(t, cloud);
        const Vec3 nm = center_normal(moved, centroid(moved));
        CHECK((nm - t.rotation * n).norm() < 1e-6);
    }
}

TEST_CASE("center_normal collinear input") {
    PointCloud line{{Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2), Vec3(3, 3, 3)}};
    CHECK_THROWS_AS((void)center_normal(line, centroid(line)), DegenerateGeometry);
}

TEST_CASE("grf_x_axis symmetric cancellation") {
    PointCloud two{{Vec3(1, 0, 1e-3), Vec3(-1, 0, 1e-3)}};
    CHECK_THROWS_AS((void)grf_x_axis(two, centroid(two), Vec3(0, 0, 1)), DegenerateGeometry);
}

TEST_CASE("grf_x_axis literal evaluation oracle") {
    const PointCloud cloud{{Vec3(0.5, 0, 0.3), Vec3(-0.2, 0, 0.3), Vec3(0, 0, -0.6),
                            Vec3(0.1, 0.4, 0.05), Vec3(-0.3, -0.2, 0.1)}};
    const Vec3 c = centroid(cloud);
    const Vec3 n = center_normal(cloud, c);
    const Vec3 axis = grf_x_axis(cloud, c, n);

    // literal weighted-projection sum
    double s = 0.0;
    for (const auto& p : cloud.points) s = std::max(s, (p - c).norm());
    Vec3 sum = Vec3::Zero();
    for (const auto& p : cloud.points) {
        const Vec3 d = p - c;
        const Vec3 v = d - n.dot(d) * n;
        const double w1 = (s - d.norm()) * (s - d.norm());
        const double w2 = n.dot(d) * n.dot(d);
        sum += w1 * w2 * v;
    }
    CHECK((axis - sum.normalized()).norm() < 1e-9);
    CHECK(std::abs(axis.dot(n)) < 1e-8);
}

TEST_CASE("grf_x_axis tangent-plane orthogonality on random clouds") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        const PointCloud cloud = skewed_cloud(rng, 90);
        const Vec3 c = centroid(cloud);
        const Vec3 n = center_normal(cloud, c);
        const Vec3 axis = grf_x_axis(cloud, c, n);
        CHECK(std::abs(axis.dot(n)) < 1e-8);
        CHECK(axis.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("build_grf postconditions") {
    std::mt19937_64 rng(43);
    const PointCloud cloud = skewed_cloud(rng, 140);
    const FrameTransform f = build_grf(cloud);

    CHECK((f.rotation.transpose() * f.rotation - Mat3::Identity()).norm() < 1e-9);
    CHECK(f.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));

    const PointCloud normalized = normalize_to_frame(cloud, f);
    CHECK(centroid(normalized).norm() < 1e-9);
    CHECK(radius(normalized, Vec3::Zero()) == doctest::Approx(1.0).epsilon(1e-9));

    // orientation rule direct evaluation (tolerance covers the vanishing sum)
    Vec3 dev = Vec3::Zero();
    for (const auto& p : cloud.points) dev += centroid(cloud) - p;
    CHECK(f.rotation.col(2).dot(dev) >= -1e-9 * static_cast<double>(cloud.size()));
}

TEST_CASE("build_grf SE(3) x scale invariance") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> scale_d(0.5, 2.0);
    const PointCloud cloud = skewed_cloud(rng, 150);
    const PointCloud base = normalize_to_frame(cloud, build_grf(cloud));

    for (int trial = 0; trial < 100; ++trial) {
        const RigidTransform t = random_rigid(rng, 3.0);
        const double s = scale_d(rng);
        PointCloud moved;
        moved.points.reserve(cloud.size());
        for (const auto& p : cloud.points) moved.points.push_back(t.apply(p * s));
        const PointCloud normalized = normalize_to_frame(moved, build_grf(moved));
        CHECK(rms_diff(normalized, base) < 1e-6);
    }
}

TEST_CASE("build_grf matches the independent oracle") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const PointCloud cloud = skewed_cloud(rng, 5 + static_cast<int>(rng() % 6));
        const FrameTransform got = build_grf(cloud);
        const FrameTransform expect = grf_oracle(cloud);
        CHECK((got.rotation - expect.rotation).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((got.translation - expect.translation).norm() < 1e-8);
        CHECK(got.scale == doctest::Approx(expect.scale).epsilon(1e-10));
    }
}

TEST_CASE("build_grf degenerate inputs") {
    PointCloud tiny{{Vec3(0, 0, 0), Vec3(1, 0, 0)}};
    CHECK_THROWS_AS((void)build_grf(tiny), DegenerateGeometry);

    PointCloud same{{Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(1, 1, 1)}};
    CHECK_THROWS_AS((void)build_grf(same), ZeroScale);
}

TEST_CASE("build_grf symmetric fallback x-axis is deterministic") {
    // Rotationally symmetric ring about z: tangent sum degenerates, the
    // fallback picks the +X projection.
    PointCloud ring;
    for (int i = 0; i < 24; ++i) {
        const double a = 2.0 * M_PI * i / 24.0;
        ring.points.emplace_back(std::cos(a), std::sin(a), 0.1);
        ring.points.emplace_back(0.5 * std::cos(a), 0.5 * std::sin(a), -0.2);
    }
    const FrameTransform f1 = build_grf(ring);
    const FrameTransform f2 = build_grf(ring);
    CHECK((f1.rotation - f2.rotation).norm() == 0.0);
    CHECK(f1.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("normalize/denormalize round-trip") {
    std::mt19937_64 rng(59);
    const PointCloud cloud = random_cloud(rng, 64);

    const PointCloud same = normalize_to_frame(cloud, FrameTransform{});
    CHECK(rms_diff(same, cloud) == 0.0);

    const FrameTransform f = build_grf(cloud);
    const PointCloud there = normalize_to_frame(cloud, f);
    const PointCloud back = denormalize_from_frame(there, f);
    CHECK(rms_diff(back, cloud) < 1e-10);
}

TEST_CASE("local_regions small-cloud and kNN-limit behavior") {
    PointCloud three{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}};
    FrameConfig cfg;
    cfg.n_neighbors = 64;
    cfg.local_radius = 100.0;
    const auto regions = local_regions(three, cfg);
    REQUIRE(regions.size() == 3);
    for (const auto& r : regions) CHECK(r.member_indices.size() == 3);

    std::mt19937_64 rng(61);
    const PointCloud cloud = random_cloud(rng, 50);
    FrameConfig knn_cfg;
    knn_cfg.n_neighbors = 12;
    knn_cfg.local_radius = 1e9; // radius cut never trims
    const auto knn_regions = local_regions(cloud, knn_cfg);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        // brute-force 12 nearest
        std::vector<std::pair<double, int>> d;
        for (std::size_t j = 0; j < cloud.size(); ++j) {
            d.emplace_back((cloud.points[j] - cloud.points[i]).norm(), static_cast<int>(j));
        }
        std::sort(d.begin(), d.end());
        std::vector<int> expect;
        for (int k = 0; k < 12; ++k) expect.push_back(d[static_cast<std::size_t>(k)].second);
        std::sort(expect.begin(), expect.end());
        std::vector<int> got = knn_regions[i].member_indices;
        std::sort(got.begin(), got.end());
        CHECK(got == expect);
    }
}

TEST_CASE("local_regions grid: interior neighborhood counts vs brute force") {
    const double h = 0.1;
    PointCloud grid;
    for (int x = 0; x < 5; ++x)
        for (int y = 0; y < 5; ++y)
            for (int z = 0; z < 5; ++z) grid.points.emplace_back(x * h, y * h, z * h);

    auto brute_force = [&](double r) {
        std::vector<std::vector<int>> out(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (std::size_t j = 0; j < grid.size(); ++j) {
                if ((grid.points[j] - grid.points[i]).norm() <= r) {
                    out[i].push_back(static_cast<int>(j));
                }
            }
        }
        return out;
    };

    for (double r_factor : {1.2, 1.5}) {
        FrameConfig cfg;
        cfg.n_neighbors = 64;
        cfg.local_radius = r_factor * h;
        const auto regions = local_regions(grid, cfg);
        const auto oracle = brute_force(cfg.local_radius);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            std::vector<int> got = regions[i].member_indices;
            std::sort(got.begin(), got.end());
            std::vector<int> expect = oracle[i];
            std::sort(expect.begin(), expect.end());
            CHECK(got == expect);
        }
    }

    // interior point at r = 1.2h: itself plus its 6 face neighbors
    FrameConfig cfg;
    cfg.n_neighbors = 64;
    cfg.local_radius = 1.2 * h;
    const auto regions = local_regions(grid, cfg);
    const std::size_t center = 2 * 25 + 2 * 5 + 2;
    CHECK(regions[center].member_indices.size() == 7);
}

TEST_CASE("local_regions radius fallback flags 3-NN") {
    PointCloud sparse{{Vec3(0, 0, 0), Vec3(5, 0, 0), Vec3(0, 5, 0), Vec3(0, 0, 5)}};
    FrameConfig cfg;
    cfg.n_neighbors = 64;
    cfg.local_radius = 0.01; // radius keeps only the center
    const auto regions = local_regions(sparse, cfg);
    for (const auto& r : regions) {
        CHECK(r.knn_fallback);
        CHECK(r.member_indices.size() == 4);
    }
}

TEST_CASE("build_lrf equals build_grf on the whole cloud") {
    std::mt19937_64 rng(67);
    const PointCloud cloud = skewed_cloud(rng, 40);
    LocalRegion whole;
    whole.center_index = 0;
    for (int i = 0; i < 40; ++i) whole.member_indices.push_back(i);
    const FrameTransform lrf = build_lrf(cloud, whole);
    const FrameTransform grf = build_grf(cloud);
    CHECK((lrf.rotation - grf.rotation).norm() < 1e-10);
    CHECK((lrf.translation - grf.translation).norm() < 1e-10);
    CHECK(lrf.scale == doctest::Approx(grf.scale).epsilon(1e-12));
}

TEST_CASE("LRF-normalized sets are pose-invariant") {
    std::mt19937_64 rng(71);
    const PointCloud cloud = skewed_cloud(rng, 120);
    FrameConfig cfg;
    cfg.n_neighbors = 24;
    cfg.local_radius_frac = 0.5;

    const auto regions = local_regions(cloud, cfg);
    std::vector<std::optional<FrameTransform>> frames;
    for (const auto& r : regions) frames.push_back(try_build_lrf(cloud, r));
    const auto sets = lrf_normalize(cloud, regions, frames);

    const RigidTransform t = random_rigid(rng, 2.0);
    const PointCloud moved = apply_rigid(t, cloud);
    const auto regions_m = local_regions(moved, cfg);
    std::vector<std::optional<FrameTransform>> frames_m;
    for (const auto& r : regions_m) frames_m.push_back(try_build_lrf(moved, r));
    const auto sets_m = lrf_normalize(moved, regions_m, frames_m);

    REQUIRE(sets.size() == sets_m.size());
    int compared = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].empty() || sets_m[i].empty()) continue;
        REQUIRE(sets[i].size() == sets_m[i].size());
        for (std::size_t j = 0; j < sets[i].size(); ++j) {
            CHECK((sets[i][j] - sets_m[i][j]).norm() < 1e-6);
        }
        ++compared;
    }
    CHECK(compared > 100); // nearly all regions have usable frames
}

TEST_CASE("lrf_normalize postconditions: centroid 0, max norm 1") {
    std::mt19937_64 rng(73);
    const PointCloud cloud = skewed_cloud(rng, 80);
    FrameConfig cfg;
    cfg.n_neighbors = 16;
    const auto regions = local_regions(cloud, cfg);
    std::vector<std::optional<FrameTransform>> frames;
    for (const auto& r : regions) frames.push_back(try_build_lrf(cloud, r));
    const auto sets = lrf_normalize(cloud, regions, frames);
    for (const auto& set : sets) {
        if (set.empty()) continue;
        Vec3 c = Vec3::Zero();
        double max_norm = 0.0;
        for (const auto& p : set) {
            c += p;
            max_norm = std::max(max_norm, p.norm());
        }
        CHECK((c / static_cast<double>(set.size())).norm() < 1e-9);
        CHECK(max_norm == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("build_lrf degenerate planar-symmetric region propagates") {
    PointCloud cloud{{Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0),
                      Vec3(0.7, 0.7, 0), Vec3(-0.7, -0.7, 0), Vec3(0.7, -0.7, 0),
                      Vec3(-0.7, 0.7, 0)}};
    LocalRegion region;
    region.center_index = 0;
    for (int i = 0; i < 8; ++i) region.member_indices.push_back(i);
    CHECK_THROWS_AS((void)build_lrf(cloud, region), DegenerateGeometry);
    CHECK_FALSE(try_build_lrf(cloud, region).has_value());
}
