#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "pairpose/geometry.hpp"

namespace pairpose::segmatch {

/// Image-level global descriptor plus patch-level local descriptors.
struct DescriptorBundle {
    Eigen::VectorXd global_vec;
    Eigen::MatrixXd local_vecs; // N_l x d
};

struct MaskProposal {
    BinaryMask mask;
    double confidence = 0.0;
    DescriptorBundle descriptor;
};

struct Assignment {
    int proposal_index = -1;
    std::optional<int> class_id;
    double score = 0.0;
};

/// (global cosine + mean over query locals of the best reference-local
/// cosine) / 2, in [-1, 1].
double match_score(const DescriptorBundle& q, const DescriptorBundle& p);

/// |a intersect b| / |a union b|; 0 when the union is empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Greedy descending-confidence NMS after dropping proposals below the
/// confidence floor; suppression at IoU > threshold, ties by input order.
std::vector<MaskProposal> nms_masks(const std::vector<MaskProposal>& proposals,
                                    double iou_threshold, double confidence_floor);

/// Best-scoring reference class per proposal, or none below min_score;
/// score ties resolve to the lowest class id.
std::vector<Assignment> assign_proposals(
    const std::vector<MaskProposal>& proposals,
    const std::vector<std::pair<int, DescriptorBundle>>& references, double min_score);

/// Manifest ingestion: JSON list of { "mask": "path.pgm", "confidence": c,
/// "descriptor": "path.bin" }. The descriptor matrix's first row is the
/// global vector, remaining rows the locals; its sidecar JSON sits at
/// "<path.bin>.json" unless given explicitly in a "descriptor_json" key.
std::vector<MaskProposal> load_proposal_manifest(const std::string& path);

/// Reference list: JSON array of { "class_id": k, "descriptor": "path.bin" }.
std::vector<std::pair<int, DescriptorBundle>> load_references(const std::string& path);

} // namespace pairpose::segmatch
