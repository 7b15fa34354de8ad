#include "pairpose/losses.hpp"

#include <cmath>

namespace pairpose {
namespace {

double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

} // namespace

double correspondence_loss(const CorrelationField& x, const GroundTruthAssignment& y_q,
                           const GroundTruthAssignment& y_p) {
    const Eigen::Index nq = x.logits.rows() - 1;
    const Eigen::Index np = x.logits.cols() - 1;
    if (static_cast<Eigen::Index>(y_q.labels.size()) != nq ||
        static_cast<Eigen::Index>(y_p.labels.size()) != np) {
        throw DimensionMismatch("correspondence_loss: label counts differ from field");
    }
    for (int label : y_q.labels) {
        if (label < 0 || label > np) throw DimensionMismatch("correspondence_loss: y_q label out of range");
    }
    for (int label : y_p.labels) {
        if (label < 0 || label > nq) throw DimensionMismatch("correspondence_loss: y_p label out of range");
    }

    const Eigen::MatrixXd row = x.row_softmax();
    double row_term = 0.0;
    for (Eigen::Index i = 1; i <= nq; ++i) {
        row_term += -safe_log(row(i, y_q.labels[static_cast<std::size_t>(i - 1)]));
    }
    row_term /= static_cast<double>(nq);

    const Eigen::MatrixXd col = x.col_softmax();
    double col_term = 0.0;
    for (Eigen::Index j = 1; j <= np; ++j) {
        col_term += -safe_log(col(y_p.labels[static_cast<std::size_t>(j - 1)], j));
    }
    col_term /= static_cast<double>(np);

    return row_term + col_term;
}

double overlap_loss(const OverlapScores& predicted, const OverlapScores& labels,
                    std::optional<std::pair<double, double>> weights) {
    const Eigen::Index n = predicted.values.size();
    if (labels.values.size() != n) {
        throw DimensionMismatch("overlap_loss: prediction/label sizes differ");
    }
    if (n == 0) throw DimensionMismatch("overlap_loss: empty input");

    double n_pos = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) n_pos += labels.values[i];
    const double n_total = static_cast<double>(n);
    const double w_pos = weights ? weights->first : (n_total - n_pos) / n_total;
    const double w_neg = weights ? weights->second : n_pos / n_total;

    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double o_hat = std::clamp(predicted.values[i], 1e-7, 1.0 - 1e-7);
        const double o_bar = labels.values[i];
        acc += w_pos * o_bar * std::log(o_hat) + w_neg * (1.0 - o_bar) * std::log(1.0 - o_hat);
    }
    return -acc / n_total;
}

LossBreakdown total_loss(const std::vector<LossStageInput>& stages) {
    LossBreakdown out;
    out.stages.reserve(stages.size());
    for (const auto& s : stages) {
        StageLoss sl;
        sl.l_x = correspondence_loss(s.field, s.y_q, s.y_p);
        sl.l_o = overlap_loss(s.pred_q, s.label_q) + overlap_loss(s.pred_p, s.label_p);
        out.stages.push_back(sl);
        out.l_x += sl.l_x;
        out.l_o += sl.l_o;
        out.total += sl.l_x + sl.l_o;
    }
    return out;
}

} // namespace pairpose
