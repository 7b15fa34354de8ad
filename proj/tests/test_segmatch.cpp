#include <doctest.h>

#include "pairpose/segmatch.hpp"
#include "test_support.hpp"

using namespace pairpose;
using namespace pairpose::segmatch;

namespace {

DescriptorBundle random_bundle(std::mt19937_64& rng, Eigen::Index n_l, Eigen::Index d) {
    std::normal_distribution<double> g(0.0, 1.0);
    DescriptorBundle b;
    b.global_vec.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) b.global_vec[i] = g(rng);
    b.local_vecs.resize(n_l, d);
    for (Eigen::Index i = 0; i < n_l; ++i)
        for (Eigen::Index j = 0; j < d; ++j) b.local_vecs(i, j) = g(rng);
    return b;
}

double match_score_oracle(const DescriptorBundle& q, const DescriptorBundle& p) {
    auto cosine = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return a.dot(b) / (a.norm() * b.norm());
    };
    const double xi_g = cosine(q.global_vec, p.global_vec);
    double xi_l = 0.0;
    for (Eigen::Index k = 0; k < q.local_vecs.rows(); ++k) {
        double best = -1e300;
        for (Eigen::Index i = 0; i < p.local_vecs.rows(); ++i) {
            best = std::max(best, cosine(q.local_vecs.row(k).transpose(),
                                         p.local_vecs.row(i).transpose()));
        }
        xi_l += best;
    }
    xi_l /= static_cast<double>(q.local_vecs.rows());
    return (xi_g + xi_l) / 2.0;
}

BinaryMask make_mask(int w, int h, int x0, int x1) {
    BinaryMask m;
    m.width = w;
    m.height = h;
    m.bits.assign(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = x0; x < x1; ++x) m.bits[static_cast<std::size_t>(y) * w + x] = 1;
    return m;
}

} // namespace

TEST_CASE("match_score endpoints") {
    std::mt19937_64 rng(501);
    const DescriptorBundle b = random_bundle(rng, 5, 12);
    CHECK(match_score(b, b) == doctest::Approx(1.0).epsilon(1e-12));

    // equal globals, orthogonal locals -> (1 + 0) / 2
    DescriptorBundle q, p;
    q.global_vec = Eigen::VectorXd::Unit(4, 0);
    p.global_vec = Eigen::VectorXd::Unit(4, 0);
    q.local_vecs = Eigen::MatrixXd::Zero(2, 4);
    p.local_vecs = Eigen::MatrixXd::Zero(2, 4);
    q.local_vecs(0, 0) = 1.0;
    q.local_vecs(1, 1) = 1.0;
    p.local_vecs(0, 2) = 1.0;
    p.local_vecs(1, 3) = 1.0;
    CHECK(match_score(q, p) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("match_score triple-loop oracle and asymmetry") {
    std::mt19937_64 rng(503);
    for (int trial = 0; trial < 30; ++trial) {
        const DescriptorBundle q = random_bundle(rng, 7, 16);
        const DescriptorBundle p = random_bundle(rng, 7, 16);
        CHECK(match_score(q, p) == doctest::Approx(match_score_oracle(q, p)).epsilon(1e-10));
    }

    // constructed asymmetry: q's only local matches one of p's two locals,
    // while each of p's locals maxes against q's single local differently
    DescriptorBundle q, p;
    q.global_vec = Eigen::VectorXd::Unit(3, 0);
    p.global_vec = Eigen::VectorXd::Unit(3, 0);
    q.local_vecs = Eigen::MatrixXd::Zero(1, 3);
    q.local_vecs(0, 0) = 1.0;
    p.local_vecs = Eigen::MatrixXd::Zero(2, 3);
    p.local_vecs(0, 0) = 1.0;
    p.local_vecs(1, 1) = 1.0;
    CHECK(match_score(q, p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(match_score(p, q) == doctest::Approx(0.75).epsilon(1e-12));

    DescriptorBundle narrow = random_bundle(rng, 3, 8);
    CHECK_THROWS_AS((void)match_score(q, narrow), DimensionMismatch);
}

TEST_CASE("mask_iou basics") {
    const BinaryMask a = make_mask(6, 2, 0, 2);
    CHECK(mask_iou(a, a) == 1.0);
    const BinaryMask b = make_mask(6, 2, 3, 5);
    CHECK(mask_iou(a, b) == 0.0);
    // half-overlap rectangles: [0,2) and [1,3): intersection 1 col, union 3
    const BinaryMask c = make_mask(6, 2, 1, 3);
    CHECK(mask_iou(a, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    BinaryMask empty = make_mask(6, 2, 0, 0);
    CHECK(mask_iou(empty, empty) == 0.0);
    BinaryMask other_dims = make_mask(4, 2, 0, 1);
    CHECK_THROWS_AS((void)mask_iou(a, other_dims), DimensionMismatch);
}

TEST_CASE("nms basics") {
    std::mt19937_64 rng(505);
    MaskProposal single;
    single.mask = make_mask(8, 8, 0, 4);
    single.confidence = 0.9;
    single.descriptor = random_bundle(rng, 2, 4);
    const auto kept = nms_masks({single}, 0.7, 0.5);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].confidence == 0.9);

    MaskProposal dup = single;
    dup.confidence = 0.8;
    const auto deduped = nms_masks({dup, single}, 0.7, 0.5);
    REQUIRE(deduped.size() == 1);
    CHECK(deduped[0].confidence == 0.9);

    MaskProposal low = single;
    low.confidence = 0.2;
    CHECK(nms_masks({low}, 0.7, 0.5).empty());
}

TEST_CASE("nms matches the greedy oracle and is an IoU antichain") {
    std::mt19937_64 rng(507);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> col(0, 9);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<MaskProposal> proposals;
        for (int i = 0; i < 8; ++i) {
            MaskProposal p;
            const int x0 = col(rng);
            const int x1 = x0 + 1 + col(rng) / 2;
            p.mask = make_mask(16, 4, x0, std::min(x1, 15));
            p.confidence = u(rng);
            proposals.push_back(std::move(p));
        }
        const double thresh = 0.4;
        const double floor_c = 0.3;
        const auto kept = nms_masks(proposals, thresh, floor_c);

        // greedy oracle
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < proposals.size(); ++i) {
            if (proposals[i].confidence >= floor_c) order.push_back(i);
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return proposals[a].confidence > proposals[b].confidence;
        });
        std::vector<std::size_t> expect;
        for (std::size_t idx : order) {
            bool ok = true;
            for (std::size_t k : expect) {
                if (mask_iou(proposals[idx].mask, proposals[k].mask) > thresh) {
                    ok = false;
                    break;
                }
            }
            if (ok) expect.push_back(idx);
        }
        REQUIRE(kept.size() == expect.size());
        for (std::size_t i = 0; i < kept.size(); ++i) {
            CHECK(kept[i].confidence == proposals[expect[i]].confidence);
        }
        // antichain under the IoU relation
        for (std::size_t i = 0; i < kept.size(); ++i) {
            for (std::size_t j = i + 1; j < kept.size(); ++j) {
                CHECK(mask_iou(kept[i].mask, kept[j].mask) <= thresh);
            }
        }
    }
}

TEST_CASE("assign_proposals basics") {
    std::mt19937_64 rng(509);
    const DescriptorBundle ref = random_bundle(rng, 4, 8);
    MaskProposal p;
    p.mask = make_mask(4, 4, 0, 2);
    p.confidence = 0.9;
    p.descriptor = ref;

    const auto hits = assign_proposals({p}, {{7, ref}}, 0.5);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].class_id == 7);
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-12));

    const auto miss = assign_proposals({p}, {{7, random_bundle(rng, 4, 8)}}, 0.999);
    REQUIRE(miss.size() == 1);
    CHECK_FALSE(miss[0].class_id.has_value());
}

TEST_CASE("assign_proposals exhaustive oracle and reference permutation") {
    std::mt19937_64 rng(511);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<MaskProposal> proposals;
        for (int i = 0; i < 4; ++i) {
            MaskProposal p;
            p.mask = make_mask(4, 4, 0, 2);
            p.confidence = 0.9;
            p.descriptor = random_bundle(rng, 3, 8);
            proposals.push_back(std::move(p));
        }
        std::vector<std::pair<int, DescriptorBundle>> refs;
        for (int k = 0; k < 3; ++k) refs.emplace_back(k, random_bundle(rng, 3, 8));

        const double min_score = -1.0;
        const auto got = assign_proposals(proposals, refs, min_score);
        for (std::size_t i = 0; i < proposals.size(); ++i) {
            double best = -1e300;
            int best_class = -1;
            for (const auto& [cid, bundle] : refs) {
                const double s = match_score(proposals[i].descriptor, bundle);
                if (s > best) {
                    best = s;
                    best_class = cid;
                }
            }
            REQUIRE(got[i].class_id.has_value());
            CHECK(*got[i].class_id == best_class);
            CHECK(got[i].score == doctest::Approx(best).epsilon(1e-12));
        }

        // permuting the reference list cannot change assignments
        std::vector<std::pair<int, DescriptorBundle>> shuffled = refs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto got2 = assign_proposals(proposals, shuffled, min_score);
        for (std::size_t i = 0; i < proposals.size(); ++i) {
            CHECK(*got2[i].class_id == *got[i].class_id);
        }
    }
}
