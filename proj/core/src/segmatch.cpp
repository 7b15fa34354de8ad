#include "pairpose/segmatch.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "pairpose/cloud_io.hpp"
#include "pairpose/descriptors.hpp"

namespace pairpose::segmatch {
namespace {

DescriptorBundle bundle_from_matrix(const Eigen::MatrixXd& m, const std::string& origin) {
    if (m.rows() < 2) {
        throw IoError(origin + ": descriptor matrix needs a global row plus >= 1 local row");
    }
    DescriptorBundle b;
    b.global_vec = m.row(0).transpose();
    b.local_vecs = m.bottomRows(m.rows() - 1);
    return b;
}

DescriptorBundle load_bundle(const nlohmann::json& entry, const std::string& origin) {
    if (!entry.contains("descriptor")) throw IoError(origin + ": missing 'descriptor'");
    const std::string bin = entry["descriptor"].get<std::string>();
    const std::string json_path = entry.contains("descriptor_json")
                                      ? entry["descriptor_json"].get<std::string>()
                                      : bin + ".json";
    return bundle_from_matrix(io::read_matrix(bin, json_path), bin);
}

} // namespace

double match_score(const DescriptorBundle& q, const DescriptorBundle& p) {
    if (q.global_vec.size() != p.global_vec.size() ||
        q.local_vecs.cols() != p.local_vecs.cols()) {
        throw DimensionMismatch("match_score: descriptor dims differ");
    }
    const double xi_g = cosine_similarity(q.global_vec, p.global_vec);

    double xi_l = 0.0;
    for (Eigen::Index k = 0; k < q.local_vecs.rows(); ++k) {
        double best = -1.0;
        for (Eigen::Index i = 0; i < p.local_vecs.rows(); ++i) {
            best = std::max(best, cosine_similarity(q.local_vecs.row(k).transpose(),
                                                    p.local_vecs.row(i).transpose()));
        }
        xi_l += best;
    }
    xi_l /= static_cast<double>(q.local_vecs.rows());
    return (xi_g + xi_l) / 2.0;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height) {
        throw DimensionMismatch("mask_iou: mask dimensions differ");
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        const bool av = a.bits[i] != 0;
        const bool bv = b.bits[i] != 0;
        inter += (av && bv);
        uni += (av || bv);
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<MaskProposal> nms_masks(const std::vector<MaskProposal>& proposals,
                                    double iou_threshold, double confidence_floor) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        if (proposals[i].confidence >= confidence_floor) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return proposals[a].confidence > proposals[b].confidence;
    });

    std::vector<MaskProposal> kept;
    for (std::size_t idx : order) {
        bool suppressed = false;
        for (const auto& k : kept) {
            if (mask_iou(proposals[idx].mask, k.mask) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(proposals[idx]);
    }
    return kept;
}

std::vector<Assignment> assign_proposals(
    const std::vector<MaskProposal>& proposals,
    const std::vector<std::pair<int, DescriptorBundle>>& references, double min_score) {
    std::vector<Assignment> out;
    out.reserve(proposals.size());
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        Assignment a;
        a.proposal_index = static_cast<int>(i);
        double best = -std::numeric_limits<double>::infinity();
        std::optional<int> best_class;
        for (const auto& [class_id, bundle] : references) {
            const double s = match_score(proposals[i].descriptor, bundle);
            if (s > best || (s == best && best_class && class_id < *best_class)) {
                best = s;
                best_class = class_id;
            }
        }
        if (best_class && best >= min_score) {
            a.class_id = best_class;
            a.score = best;
        } else {
            a.class_id = std::nullopt;
            a.score = references.empty() ? 0.0 : best;
        }
        out.push_back(a);
    }
    return out;
}

std::vector<MaskProposal> load_proposal_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
    if (!doc.is_array()) throw IoError(path + ": manifest must be a JSON array");

    std::vector<MaskProposal> out;
    for (const auto& entry : doc) {
        MaskProposal p;
        if (!entry.contains("mask") || !entry.contains("confidence")) {
            throw IoError(path + ": entries need 'mask' and 'confidence'");
        }
        p.mask = io::read_pgm_mask(entry["mask"].get<std::string>());
        p.confidence = entry["confidence"].get<double>();
        p.descriptor = load_bundle(entry, path);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::pair<int, DescriptorBundle>> load_references(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open references: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
    if (!doc.is_array()) throw IoError(path + ": references must be a JSON array");

    std::vector<std::pair<int, DescriptorBundle>> out;
    for (const auto& entry : doc) {
        if (!entry.contains("class_id")) throw IoError(path + ": entries need 'class_id'");
        out.emplace_back(entry["class_id"].get<int>(), load_bundle(entry, path));
    }
    return out;
}

} // namespace pairpose::segmatch
