#pragma once

#include <Eigen/Core>
#include <ostream>
#include <vector>

#include "pairpose/descriptors.hpp"
#include "pairpose/geometry.hpp"

namespace pairpose {

/// Raw correlation logits, (Nq+1) x (Np+1); index 0 is the background token
/// on both axes. Softmax views are derived on demand.
struct CorrelationField {
    Eigen::MatrixXd logits;

    Eigen::MatrixXd row_softmax() const;
    Eigen::MatrixXd col_softmax() const;
};

/// Per-point overlap probabilities in [0,1]; index 0 = background token.
struct OverlapScores {
    Eigen::VectorXd values;
};

/// Matched pairs in correlation-field indexing (>= 1, background excluded),
/// at most one pair per query index.
struct CorrespondenceSet {
    struct Pair {
        int query_index;
        int reference_index;
        double weight;
    };
    std::vector<Pair> pairs;
};

/// For each point the field index of its counterpart (1-based), or 0 when
/// the nearest counterpart under the ground-truth transform is beyond delta.
struct GroundTruthAssignment {
    std::vector<int> labels;
};

/// logits[i][j] = (oq_i * fq_i) . (op_j * fp_j). Inputs carry background
/// rows; dimensions must agree.
CorrelationField build_correlation(const FeatureSet& fq, const FeatureSet& fp,
                                   const OverlapScores& oq, const OverlapScores& op);

/// Logistic of (best cosine against the counterpart rows - margin) / temperature
/// per non-background row; background score fixed at 0.5.
std::pair<OverlapScores, OverlapScores> heuristic_overlap(const FeatureSet& fq,
                                                          const FeatureSet& fp,
                                                          double temperature,
                                                          double margin = 0.5);

std::pair<GroundTruthAssignment, GroundTruthAssignment> gt_assignment(
    const PointCloud& q, const PointCloud& p, const RigidTransform& gt, double delta);

std::pair<OverlapScores, OverlapScores> gt_overlap_labels(
    const PointCloud& q, const PointCloud& p, const RigidTransform& gt, double delta);

/// Fraction of query points whose nearest counterpart under gt is within delta.
double overlap_ratio(const PointCloud& q, const PointCloud& p,
                     const RigidTransform& gt, double delta);

/// Row-argmax extraction with mutual row/column consistency filtering;
/// weight = sqrt(row_prob * col_prob).
CorrespondenceSet extract_correspondences(const CorrelationField& x, double threshold);

/// Debug dump: logits as CSV, row 0 / column 0 = background token.
void dump_correlation_csv(const CorrelationField& x, std::ostream& os);
CorrelationField read_correlation_csv(std::istream& is);

} // namespace pairpose
