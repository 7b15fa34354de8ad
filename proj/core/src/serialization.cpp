#include "pairpose/serialization.hpp"

#include <fstream>
#include <sstream>

namespace pairpose::serialize {
namespace {

using nlohmann::json;

json mat3_to_json(const Mat3& m) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) {
        rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
    }
    return rows;
}

Mat3 mat3_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected 3 rows");
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || row.size() != 3) {
            throw ConfigError(where + ": row " + std::to_string(i) + " must have 3 entries");
        }
        for (int c = 0; c < 3; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Vec3 vec3_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected 3 entries");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

std::vector<int> labels_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array");
    std::vector<int> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(e.get<int>());
    return out;
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

} // namespace

json rigid_to_json(const RigidTransform& t) {
    return {{"rotation", mat3_to_json(t.rotation)},
            {"translation", {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

RigidTransform rigid_from_json(const json& j) {
    if (!j.contains("rotation") || !j.contains("translation")) {
        throw ConfigError("rigid transform: missing 'rotation'/'translation'");
    }
    RigidTransform t;
    t.rotation = mat3_from_json(j["rotation"], "rotation");
    t.translation = vec3_from_json(j["translation"], "translation");
    return t;
}

json frame_to_json(const FrameTransform& f) {
    return {{"rotation", mat3_to_json(f.rotation)},
            {"translation", {f.translation.x(), f.translation.y(), f.translation.z()}},
            {"scale", f.scale}};
}

FrameTransform frame_from_json(const json& j) {
    for (const char* key : {"rotation", "translation", "scale"}) {
        if (!j.contains(key)) throw ConfigError(std::string("frame: missing '") + key + "'");
    }
    FrameTransform f;
    f.rotation = mat3_from_json(j["rotation"], "rotation");
    f.translation = vec3_from_json(j["translation"], "translation");
    f.scale = j["scale"].get<double>();
    if (!(f.scale > 0.0)) throw ConfigError("frame: scale must be > 0");
    return f;
}

json pose_estimate_to_json(const PoseEstimate& est) {
    json j = rigid_to_json(est.pose);
    j["coarse"] = rigid_to_json(est.coarse);
    j["n_corr"] = est.n_correspondences;
    j["residual"] = est.residual;
    return j;
}

json loss_breakdown_to_json(const LossBreakdown& lb) {
    json stages = json::array();
    for (const auto& s : lb.stages) {
        stages.push_back({{"l_x", s.l_x}, {"l_o", s.l_o}});
    }
    return {{"l_x", lb.l_x}, {"l_o", lb.l_o}, {"total", lb.total}, {"stages", stages}};
}

json pipeline_config_to_json(const PipelineConfig& cfg) {
    json desc = {{"provider", cfg.descriptor.provider}};
    for (const auto& [k, v] : cfg.descriptor.parameters) desc[k] = v;
    return {{"n_coarse", cfg.n_coarse},
            {"n_fine", cfg.n_fine},
            {"n_hypotheses", cfg.n_hypotheses},
            {"delta", cfg.delta},
            {"n_neighbors", cfg.frame.n_neighbors},
            {"local_radius", cfg.frame.local_radius},
            {"local_radius_frac", cfg.frame.local_radius_frac},
            {"seed", cfg.seed},
            {"fine_iterations", cfg.fine_iterations},
            {"mutual_threshold", cfg.mutual_threshold},
            {"overlap_temperature", cfg.overlap_temperature},
            {"overlap_margin", cfg.overlap_margin},
            {"correlation_sharpness", cfg.correlation_sharpness},
            {"descriptor", desc}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig cfg;
    auto get_int = [&](const char* key, int& out, int min_val) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer()) {
            throw ConfigError(std::string("pipeline.") + key + " must be an integer");
        }
        out = j[key].get<int>();
        if (out < min_val) {
            throw ConfigError(std::string("pipeline.") + key + " must be >= " +
                              std::to_string(min_val));
        }
    };
    auto get_double = [&](const char* key, double& out, bool positive) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) {
            throw ConfigError(std::string("pipeline.") + key + " must be a number");
        }
        out = j[key].get<double>();
        if (positive && !(out > 0.0)) {
            throw ConfigError(std::string("pipeline.") + key + " must be > 0");
        }
    };
    get_int("n_coarse", cfg.n_coarse, 3);
    get_int("n_fine", cfg.n_fine, 3);
    get_int("n_hypotheses", cfg.n_hypotheses, 1);
    get_int("fine_iterations", cfg.fine_iterations, 1);
    get_int("n_neighbors", cfg.frame.n_neighbors, 3);
    get_double("delta", cfg.delta, true);
    get_double("local_radius", cfg.frame.local_radius, false);
    get_double("local_radius_frac", cfg.frame.local_radius_frac, true);
    get_double("mutual_threshold", cfg.mutual_threshold, false);
    get_double("overlap_temperature", cfg.overlap_temperature, true);
    get_double("overlap_margin", cfg.overlap_margin, false);
    get_double("correlation_sharpness", cfg.correlation_sharpness, false);
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("descriptor")) {
        const auto& d = j["descriptor"];
        if (!d.is_object() || !d.contains("provider")) {
            throw ConfigError("pipeline.descriptor must be an object with 'provider'");
        }
        cfg.descriptor.provider = d["provider"].get<std::string>();
        for (auto it = d.begin(); it != d.end(); ++it) {
            if (it.key() == "provider") continue;
            cfg.descriptor.parameters[it.key()] =
                it->is_string() ? it->get<std::string>() : it->dump();
        }
    }
    return cfg;
}

std::vector<LossStageInput> load_loss_replay(const std::string& path) {
    const json doc = read_json_file(path);
    if (!doc.contains("stages") || !doc["stages"].is_array()) {
        throw ConfigError(path + ": missing 'stages' array");
    }
    std::vector<LossStageInput> stages;
    std::size_t index = 0;
    for (const auto& s : doc["stages"]) {
        const std::string where = path + ": stages[" + std::to_string(index++) + "]";
        for (const char* key :
             {"logits_csv", "y_q", "y_p", "o_hat_q", "o_bar_q", "o_hat_p", "o_bar_p"}) {
            if (!s.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
        }
        LossStageInput in;
        std::ifstream csv(s["logits_csv"].get<std::string>());
        if (!csv) throw IoError(where + ": cannot open " + s["logits_csv"].get<std::string>());
        in.field = read_correlation_csv(csv);
        in.y_q.labels = labels_from_json(s["y_q"], where + ".y_q");
        in.y_p.labels = labels_from_json(s["y_p"], where + ".y_p");
        in.pred_q.values = vector_from_json(s["o_hat_q"], where + ".o_hat_q");
        in.label_q.values = vector_from_json(s["o_bar_q"], where + ".o_bar_q");
        in.pred_p.values = vector_from_json(s["o_hat_p"], where + ".o_hat_p");
        in.label_p.values = vector_from_json(s["o_bar_p"], where + ".o_bar_p");
        stages.push_back(std::move(in));
    }
    return stages;
}

} // namespace pairpose::serialize

namespace pairpose::bench {

BenchConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }

    BenchConfig cfg = BenchConfig::defaults();
    if (doc.contains("shapes")) {
        if (!doc["shapes"].is_array() || doc["shapes"].empty()) {
            throw ConfigError(path + ": 'shapes' must be a non-empty array");
        }
        cfg.shapes.clear();
        std::size_t i = 0;
        for (const auto& s : doc["shapes"]) {
            const std::string where = path + ": shapes[" + std::to_string(i++) + "]";
            ShapeSpec spec;
            if (s.contains("kind")) spec.kind = s["kind"].get<std::string>();
            if (s.contains("point_count")) {
                spec.point_count = s["point_count"].get<int>();
                if (spec.point_count < 50) throw ConfigError(where + ".point_count must be >= 50");
            }
            if (s.contains("seed")) spec.seed = s["seed"].get<std::uint64_t>();
            if (s.contains("params")) {
                if (!s["params"].is_object()) throw ConfigError(where + ".params must be an object");
                for (auto it = s["params"].begin(); it != s["params"].end(); ++it) {
                    spec.params[it.key()] = it->get<double>();
                }
            }
            cfg.shapes.push_back(std::move(spec));
        }
    }
    if (doc.contains("bins")) {
        if (!doc["bins"].is_array() || doc["bins"].empty()) {
            throw ConfigError(path + ": 'bins' must be a non-empty array");
        }
        cfg.bins.clear();
        std::size_t i = 0;
        for (const auto& b : doc["bins"]) {
            const std::string where = path + ": bins[" + std::to_string(i++) + "]";
            if (!b.is_array() || b.size() != 2) throw ConfigError(where + " must be [lo, hi]");
            const double lo = b[0].get<double>();
            const double hi = b[1].get<double>();
            if (lo < 0.0 || hi < lo) throw ConfigError(where + ": need 0 <= lo <= hi");
            cfg.bins.emplace_back(lo, hi);
        }
    }
    auto get_double = [&](const char* key, double& out, double lo, double hi) {
        if (!doc.contains(key)) return;
        if (!doc[key].is_number()) throw ConfigError(path + ": '" + key + "' must be a number");
        out = doc[key].get<double>();
        if (out < lo || out > hi) {
            throw ConfigError(path + ": '" + key + "' out of range [" + std::to_string(lo) +
                              ", " + std::to_string(hi) + "]");
        }
    };
    if (doc.contains("pairs_per_bin")) {
        cfg.pairs_per_bin = doc["pairs_per_bin"].get<int>();
        if (cfg.pairs_per_bin < 1) throw ConfigError(path + ": 'pairs_per_bin' must be >= 1");
    }
    get_double("noise_sigma", cfg.noise_sigma, 0.0, 1.0);
    get_double("outlier_fraction", cfg.outlier_fraction, 0.0, 0.9);
    get_double("occlusion_fraction", cfg.occlusion_fraction, 0.0, 0.9);
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("include_timing")) cfg.include_timing = doc["include_timing"].get<bool>();
    if (doc.contains("pipeline")) {
        cfg.pipeline = serialize::pipeline_config_from_json(doc["pipeline"]);
    }
    return cfg;
}

} // namespace pairpose::bench
