#include <doctest.h>

#include "pairpose/losses.hpp"
#include "test_support.hpp"

using namespace pairpose;

namespace {

CorrelationField random_field(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> g(0.0, 2.0);
    CorrelationField x;
    x.logits.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) x.logits(i, j) = g(rng);
    return x;
}

GroundTruthAssignment random_labels(std::mt19937_64& rng, int n, int max_label) {
    std::uniform_int_distribution<int> u(0, max_label);
    GroundTruthAssignment y;
    for (int i = 0; i < n; ++i) y.labels.push_back(u(rng));
    return y;
}

// literal per-row / per-column cross-entropy
double ce_oracle(const CorrelationField& x, const GroundTruthAssignment& y_q,
                 const GroundTruthAssignment& y_p) {
    const Eigen::Index nq = x.logits.rows() - 1;
    const Eigen::Index np = x.logits.cols() - 1;
    double row_term = 0.0;
    for (Eigen::Index i = 1; i <= nq; ++i) {
        double denom = 0.0;
        const double m = x.logits.row(i).maxCoeff();
        for (Eigen::Index j = 0; j <= np; ++j) denom += std::exp(x.logits(i, j) - m);
        const double p =
            std::exp(x.logits(i, y_q.labels[static_cast<std::size_t>(i - 1)]) - m) / denom;
        row_term += -std::log(p);
    }
    row_term /= static_cast<double>(nq);

    double col_term = 0.0;
    for (Eigen::Index j = 1; j <= np; ++j) {
        double denom = 0.0;
        const double m = x.logits.col(j).maxCoeff();
        for (Eigen::Index i = 0; i <= nq; ++i) denom += std::exp(x.logits(i, j) - m);
        const double p =
            std::exp(x.logits(y_p.labels[static_cast<std::size_t>(j - 1)], j) - m) / denom;
        col_term += -std::log(p);
    }
    col_term /= static_cast<double>(np);
    return row_term + col_term;
}

double wbce_oracle(const Eigen::VectorXd& pred, const Eigen::VectorXd& label) {
    const Eigen::Index n = pred.size();
    double n_pos = label.sum();
    const double w_pos = (n - n_pos) / n;
    const double w_neg = n_pos / n;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = std::clamp(pred[i], 1e-7, 1.0 - 1e-7);
        acc += w_pos * label[i] * std::log(p) + w_neg * (1.0 - label[i]) * std::log(1.0 - p);
    }
    return -acc / n;
}

} // namespace

TEST_CASE("correspondence_loss saturated-correct and uniform cases") {
    const int n = 5;
    CorrelationField x;
    x.logits = Eigen::MatrixXd::Zero(n + 1, n + 1);
    GroundTruthAssignment y;
    for (int i = 1; i <= n; ++i) {
        x.logits(i, i) = 1000.0;
        y.labels.push_back(i);
    }
    for (int j = 1; j <= n; ++j) x.logits(j, j) += 0.0;
    CHECK(correspondence_loss(x, y, y) < 1e-6);

    CorrelationField uniform;
    uniform.logits = Eigen::MatrixXd::Zero(n + 1, n + 1);
    CHECK(correspondence_loss(uniform, y, y) ==
          doctest::Approx(2.0 * std::log(n + 1.0)).epsilon(1e-12));
}

TEST_CASE("correspondence_loss matches the literal CE oracle") {
    std::mt19937_64 rng(301);
    for (int trial = 0; trial < 30; ++trial) {
        const CorrelationField x = random_field(rng, 6, 6);
        const GroundTruthAssignment yq = random_labels(rng, 5, 5);
        const GroundTruthAssignment yp = random_labels(rng, 5, 5);
        CHECK(correspondence_loss(x, yq, yp) ==
              doctest::Approx(ce_oracle(x, yq, yp)).epsilon(1e-10));
    }
}

TEST_CASE("correspondence_loss dimension checks") {
    CorrelationField x;
    x.logits = Eigen::MatrixXd::Zero(4, 4);
    GroundTruthAssignment short_y{{1, 2}};
    GroundTruthAssignment ok{{1, 2, 3}};
    CHECK_THROWS_AS((void)correspondence_loss(x, short_y, ok), DimensionMismatch);
    GroundTruthAssignment out_of_range{{1, 2, 9}};
    CHECK_THROWS_AS((void)correspondence_loss(x, out_of_range, ok), DimensionMismatch);
}

TEST_CASE("overlap_loss endpoints") {
    OverlapScores label;
    label.values.resize(6);
    label.values << 0, 1, 1, 1, 0, 0; // background + balanced-ish
    OverlapScores perfect;
    perfect.values.resize(6);
    perfect.values << 0, 1, 1, 1, 0, 0;
    CHECK(overlap_loss(perfect, label) <= 1e-6);

    OverlapScores half;
    half.values = Eigen::VectorXd::Constant(6, 0.5);
    OverlapScores balanced;
    balanced.values.resize(6);
    balanced.values << 0, 0, 0, 1, 1, 1;
    CHECK(overlap_loss(half, balanced) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("overlap_loss matches the element-wise oracle") {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 8;
        OverlapScores pred, label;
        pred.values.resize(n);
        label.values.resize(n);
        label.values[0] = 0.0;
        pred.values[0] = u(rng);
        for (int i = 1; i < n; ++i) {
            pred.values[i] = u(rng);
            label.values[i] = u(rng) < 0.5 ? 0.0 : 1.0;
        }
        CHECK(overlap_loss(pred, label) ==
              doctest::Approx(wbce_oracle(pred.values, label.values)).epsilon(1e-10));
    }
}

TEST_CASE("overlap_loss permutation invariance and explicit weights") {
    std::mt19937_64 rng(305);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 10;
    OverlapScores pred, label;
    pred.values.resize(n);
    label.values.resize(n);
    for (int i = 0; i < n; ++i) {
        pred.values[i] = u(rng);
        label.values[i] = u(rng) < 0.4 ? 0.0 : 1.0;
    }
    const double base = overlap_loss(pred, label);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    OverlapScores pred_p, label_p;
    pred_p.values.resize(n);
    label_p.values.resize(n);
    for (int i = 0; i < n; ++i) {
        pred_p.values[i] = pred.values[perm[static_cast<std::size_t>(i)]];
        label_p.values[i] = label.values[perm[static_cast<std::size_t>(i)]];
    }
    CHECK(overlap_loss(pred_p, label_p) == doctest::Approx(base).epsilon(1e-12));

    // explicit weights override the class balancing
    const double custom = overlap_loss(pred, label, std::make_pair(1.0, 1.0));
    CHECK(custom != doctest::Approx(base).epsilon(1e-6));
}

TEST_CASE("total_loss sums stages exactly") {
    std::mt19937_64 rng(307);
    std::vector<LossStageInput> stages;
    for (int s = 0; s < 3; ++s) {
        LossStageInput in;
        in.field = random_field(rng, 5, 5);
        in.y_q = random_labels(rng, 4, 4);
        in.y_p = random_labels(rng, 4, 4);
        std::uniform_real_distribution<double> u(0.05, 0.95);
        in.pred_q.values.resize(5);
        in.label_q.values.resize(5);
        in.pred_p.values.resize(5);
        in.label_p.values.resize(5);
        in.label_q.values[0] = 0;
        in.label_p.values[0] = 0;
        for (int i = 0; i < 5; ++i) {
            in.pred_q.values[i] = u(rng);
            in.pred_p.values[i] = u(rng);
            if (i > 0) {
                in.label_q.values[i] = u(rng) < 0.5 ? 0.0 : 1.0;
                in.label_p.values[i] = u(rng) < 0.5 ? 0.0 : 1.0;
            }
        }
        stages.push_back(std::move(in));
    }
    const LossBreakdown lb = total_loss(stages);
    REQUIRE(lb.stages.size() == 3);
    double sum = 0.0;
    double sum_x = 0.0;
    double sum_o = 0.0;
    for (const auto& s : lb.stages) {
        CHECK(s.l_x >= 0.0);
        CHECK(s.l_o >= 0.0);
        sum += s.l_x + s.l_o;
        sum_x += s.l_x;
        sum_o += s.l_o;
    }
    CHECK(lb.total == doctest::Approx(sum).epsilon(1e-12));
    CHECK(lb.l_x == doctest::Approx(sum_x).epsilon(1e-12));
    CHECK(lb.l_o == doctest::Approx(sum_o).epsilon(1e-12));
}
