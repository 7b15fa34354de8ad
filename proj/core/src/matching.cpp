#include "pairpose/matching.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

namespace pairpose {
namespace {

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        out.row(i) = (logits.row(i).array() - m).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

// Nearest counterpart of every transformed query point and of every
// reference point against the transformed query cloud.
struct NearestPairs {
    std::vector<double> q_dist;
    std::vector<int> q_index;
    std::vector<double> p_dist;
    std::vector<int> p_index;
};

NearestPairs nearest_counterparts(const PointCloud& q, const PointCloud& p,
                                  const RigidTransform& gt) {
    const std::size_t nq = q.size();
    const std::size_t np = p.size();
    std::vector<Vec3> tq(nq);
    for (std::size_t i = 0; i < nq; ++i) tq[i] = gt.apply(q.points[i]);

    NearestPairs out;
    out.q_dist.assign(nq, std::numeric_limits<double>::infinity());
    out.q_index.assign(nq, -1);
    out.p_dist.assign(np, std::numeric_limits<double>::infinity());
    out.p_index.assign(np, -1);
    for (std::size_t i = 0; i < nq; ++i) {
        for (std::size_t j = 0; j < np; ++j) {
            const double d = (tq[i] - p.points[j]).norm();
            if (d < out.q_dist[i]) {
                out.q_dist[i] = d;
                out.q_index[i] = static_cast<int>(j);
            }
            if (d < out.p_dist[j]) {
                out.p_dist[j] = d;
                out.p_index[j] = static_cast<int>(i);
            }
        }
    }
    return out;
}

void check_delta(double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
}

} // namespace

Eigen::MatrixXd CorrelationField::row_softmax() const { return softmax_rows(logits); }

Eigen::MatrixXd CorrelationField::col_softmax() const {
    return softmax_rows(logits.transpose()).transpose();
}

CorrelationField build_correlation(const FeatureSet& fq, const FeatureSet& fp,
                                   const OverlapScores& oq, const OverlapScores& op) {
    if (fq.dim() != fp.dim()) {
        throw DimensionMismatch("build_correlation: feature dims differ");
    }
    if (fq.count() != oq.values.size() || fp.count() != op.values.size()) {
        throw DimensionMismatch("build_correlation: overlap/feature counts differ");
    }
    CorrelationField x;
    x.logits = (oq.values.asDiagonal() * fq.rows) *
               (op.values.asDiagonal() * fp.rows).transpose();
    return x;
}

std::pair<OverlapScores, OverlapScores> heuristic_overlap(const FeatureSet& fq,
                                                          const FeatureSet& fp,
                                                          double temperature,
                                                          double margin) {
    if (fq.dim() != fp.dim()) throw DimensionMismatch("heuristic_overlap: feature dims differ");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");

    const Eigen::VectorXd nq = fq.rows.rowwise().norm();
    const Eigen::VectorXd np = fp.rows.rowwise().norm();
    const Eigen::MatrixXd gram = fq.rows * fp.rows.transpose();

    auto logistic = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    auto score_side = [&](bool query_side) {
        const Eigen::Index n = query_side ? fq.count() : fp.count();
        OverlapScores s;
        s.values.resize(n);
        s.values[0] = 0.5;
        for (Eigen::Index i = 1; i < n; ++i) {
            double best = -1.0;
            const Eigen::Index m = query_side ? fp.count() : fq.count();
            for (Eigen::Index j = 0; j < m; ++j) {
                const double denom = query_side ? nq[i] * np[j] : nq[j] * np[i];
                if (denom < 1e-150) continue;
                const double cos_ij = (query_side ? gram(i, j) : gram(j, i)) / denom;
                best = std::max(best, cos_ij);
            }
            s.values[i] = logistic((best - margin) / temperature);
        }
        return s;
    };
    return {score_side(true), score_side(false)};
}

std::pair<GroundTruthAssignment, GroundTruthAssignment> gt_assignment(
    const PointCloud& q, const PointCloud& p, const RigidTransform& gt, double delta) {
    check_delta(delta);
    const NearestPairs nn = nearest_counterparts(q, p, gt);
    GroundTruthAssignment yq, yp;
    yq.labels.resize(q.size());
    yp.labels.resize(p.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        yq.labels[i] = nn.q_dist[i] <= delta ? nn.q_index[i] + 1 : 0;
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
        yp.labels[j] = nn.p_dist[j] <= delta ? nn.p_index[j] + 1 : 0;
    }
    return {yq, yp};
}

std::pair<OverlapScores, OverlapScores> gt_overlap_labels(
    const PointCloud& q, const PointCloud& p, const RigidTransform& gt, double delta) {
    check_delta(delta);
    const NearestPairs nn = nearest_counterparts(q, p, gt);
    OverlapScores oq, op;
    oq.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q.size()) + 1);
    op.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.size()) + 1);
    for (std::size_t i = 0; i < q.size(); ++i) {
        oq.values[static_cast<Eigen::Index>(i) + 1] = nn.q_dist[i] <= delta ? 1.0 : 0.0;
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
        op.values[static_cast<Eigen::Index>(j) + 1] = nn.p_dist[j] <= delta ? 1.0 : 0.0;
    }
    return {oq, op};
}

double overlap_ratio(const PointCloud& q, const PointCloud& p,
                     const RigidTransform& gt, double delta) {
    const auto [oq, op] = gt_overlap_labels(q, p, gt, delta);
    return oq.values.tail(oq.values.size() - 1).mean();
}

CorrespondenceSet extract_correspondences(const CorrelationField& x, double threshold) {
    const Eigen::MatrixXd row = x.row_softmax();
    const Eigen::MatrixXd col = x.col_softmax();
    CorrespondenceSet out;
    for (Eigen::Index i = 1; i < row.rows(); ++i) {
        Eigen::Index best = 0;
        double best_p = row(i, 0);
        for (Eigen::Index j = 1; j < row.cols(); ++j) {
            if (row(i, j) > best_p) {
                best_p = row(i, j);
                best = j;
            }
        }
        if (best == 0) continue;
        const double mutual = row(i, best) * col(i, best);
        if (mutual < threshold) continue;
        out.pairs.push_back({static_cast<int>(i), static_cast<int>(best), std::sqrt(mutual)});
    }
    return out;
}

void dump_correlation_csv(const CorrelationField& x, std::ostream& os) {
    char buf[64];
    for (Eigen::Index i = 0; i < x.logits.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.logits.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", x.logits(i, j));
            os << buf;
            if (j + 1 < x.logits.cols()) os << ",";
        }
        os << "\n";
    }
}

CorrelationField read_correlation_csv(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw IoError("correlation csv: ragged rows");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("correlation csv: empty input");
    CorrelationField x;
    x.logits.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            x.logits(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return x;
}

} // namespace pairpose
