#pragma once

#include <json.hpp>
#include <string>

#include "pairpose/bench.hpp"
#include "pairpose/geometry.hpp"
#include "pairpose/losses.hpp"
#include "pairpose/pipeline.hpp"

namespace pairpose::serialize {

nlohmann::json rigid_to_json(const RigidTransform& t);
RigidTransform rigid_from_json(const nlohmann::json& j);

// { "rotation": [[..] x3], "translation": [x,y,z], "scale": s }
nlohmann::json frame_to_json(const FrameTransform& f);
FrameTransform frame_from_json(const nlohmann::json& j);

// { "rotation", "translation", "coarse": {...}, "n_corr", "residual" }
nlohmann::json pose_estimate_to_json(const PoseEstimate& est);

nlohmann::json loss_breakdown_to_json(const LossBreakdown& lb);

nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

/// Loss replay manifest: { "stages": [ { "logits_csv": path, "y_q": [...],
/// "y_p": [...], "o_hat_q": [...], "o_bar_q": [...], "o_hat_p": [...],
/// "o_bar_p": [...] } ] }.
std::vector<LossStageInput> load_loss_replay(const std::string& path);

} // namespace pairpose::serialize
