#pragma once

#include <optional>
#include <vector>

#include "pairpose/matching.hpp"

namespace pairpose {

struct StageLoss {
    double l_x = 0.0;
    double l_o = 0.0;
};

struct LossBreakdown {
    double l_x = 0.0;
    double l_o = 0.0;
    double total = 0.0;
    std::vector<StageLoss> stages;
};

/// One supervision stage: correlation field plus its ground-truth
/// assignments and overlap prediction/label pairs for both clouds.
struct LossStageInput {
    CorrelationField field;
    GroundTruthAssignment y_q;
    GroundTruthAssignment y_p;
    OverlapScores pred_q;
    OverlapScores label_q;
    OverlapScores pred_p;
    OverlapScores label_p;
};

/// Mean row cross-entropy over non-background query rows plus the symmetric
/// column term; labels index the counterpart axis with 0 = background.
double correspondence_loss(const CorrelationField& x, const GroundTruthAssignment& y_q,
                           const GroundTruthAssignment& y_p);

/// Weighted binary cross-entropy with class-frequency balancing
/// (w_pos = N_neg/N, w_neg = N_pos/N) unless explicit weights are given.
/// Predictions are clamped to [1e-7, 1 - 1e-7].
double overlap_loss(const OverlapScores& predicted, const OverlapScores& labels,
                    std::optional<std::pair<double, double>> weights = std::nullopt);

LossBreakdown total_loss(const std::vector<LossStageInput>& stages);

} // namespace pairpose
