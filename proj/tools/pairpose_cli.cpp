#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pairpose/bench.hpp"
#include "pairpose/cloud_io.hpp"
#include "pairpose/losses.hpp"
#include "pairpose/pipeline.hpp"
#include "pairpose/segmatch.hpp"
#include "pairpose/serialization.hpp"

namespace pp = pairpose;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    std::string provider;
};

pp::bench::BenchConfig resolve_bench_config(const CommonOpts& opts) {
    pp::bench::BenchConfig cfg = opts.config.empty() ? pp::bench::BenchConfig::defaults()
                                                     : pp::bench::load_config(opts.config);
    if (opts.seed_set) cfg.seed = opts.seed;
    if (!opts.provider.empty()) cfg.pipeline.descriptor.provider = opts.provider;
    return cfg;
}

void emit(const nlohmann::json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream f(out_path);
        if (!f) throw pp::IoError("cannot write: " + out_path);
        f << doc.dump(2) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point-cloud relative pose estimation toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto add_common = [&](CLI::App* cmd, bool with_out_dir) {
        cmd->add_option("--config", opts.config, "JSON config file");
        cmd->add_option("--seed", opts.seed, "master RNG seed")
            ->each([&](const std::string&) { opts.seed_set = true; });
        cmd->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--provider", opts.provider, "descriptor provider id");
        if (with_out_dir) cmd->add_option("--out-dir", opts.out_dir, "output directory");
    };

    // gen: emit benchmark pair PLYs + ground-truth JSON
    auto* gen = app.add_subcommand("gen", "generate benchmark pairs");
    add_common(gen, true);

    // run: full benchmark sweep -> report.csv/report.json
    auto* run = app.add_subcommand("run", "run the benchmark sweep");
    add_common(run, true);
    bool no_timing = false;
    run->add_flag("--no-timing", no_timing,
                  "zero the mean_ms column for reproducible output");

    // pose: single pair -> PoseEstimate JSON
    auto* pose = app.add_subcommand("pose", "estimate the pose of one cloud pair");
    std::string query_path, ref_path, pose_out;
    pose->add_option("query", query_path, "query PLY")->required();
    pose->add_option("reference", ref_path, "reference PLY")->required();
    pose->add_option("--out", pose_out, "output JSON path (default: stdout)");
    add_common(pose, false);

    // segmatch: proposal manifest + references -> assignments JSON
    auto* segmatch = app.add_subcommand("segmatch", "match mask proposals to references");
    std::string proposals_path, references_path, seg_out;
    double min_score = 0.5, iou_threshold = 0.7, confidence_floor = 0.5;
    bool skip_nms = false;
    segmatch->add_option("--proposals", proposals_path, "proposal manifest JSON")->required();
    segmatch->add_option("--references", references_path, "reference list JSON")->required();
    segmatch->add_option("--min-score", min_score, "assignment score floor");
    segmatch->add_option("--iou-threshold", iou_threshold, "NMS IoU threshold");
    segmatch->add_option("--confidence-floor", confidence_floor, "NMS confidence floor");
    segmatch->add_flag("--no-nms", skip_nms, "assign raw proposals without NMS");
    segmatch->add_option("--out", seg_out, "output JSON path (default: stdout)");

    // loss: replay correlation dumps -> LossBreakdown JSON
    auto* loss = app.add_subcommand("loss", "evaluate losses from a replay manifest");
    std::string loss_input, loss_out;
    loss->add_option("--input", loss_input, "loss replay manifest JSON")->required();
    loss->add_option("--out", loss_out, "output JSON path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            pp::bench::generate_pairs(resolve_bench_config(opts), opts.out_dir);
            std::cout << "pairs written to " << opts.out_dir << "\n";
        } else if (run->parsed()) {
            pp::bench::BenchConfig cfg = resolve_bench_config(opts);
            if (no_timing) cfg.include_timing = false;
            const pp::bench::BenchReport report = pp::bench::run_benchmark(cfg, opts.threads);
            pp::bench::write_report(report, opts.out_dir);
            std::cout << pp::bench::report_csv(report);
        } else if (pose->parsed()) {
            pp::PipelineConfig cfg;
            if (!opts.config.empty()) {
                std::ifstream f(opts.config);
                if (!f) throw pp::IoError("cannot open config: " + opts.config);
                cfg = pp::serialize::pipeline_config_from_json(nlohmann::json::parse(f));
            }
            if (opts.seed_set) cfg.seed = opts.seed;
            if (!opts.provider.empty()) cfg.descriptor.provider = opts.provider;
            const pp::PointCloud query = pp::io::read_ply(query_path);
            const pp::PointCloud reference = pp::io::read_ply(ref_path);
            const pp::PoseEstimate est = pp::estimate_relative_pose(query, reference, cfg);
            emit(pp::serialize::pose_estimate_to_json(est), pose_out);
        } else if (segmatch->parsed()) {
            auto proposals = pp::segmatch::load_proposal_manifest(proposals_path);
            const auto references = pp::segmatch::load_references(references_path);
            if (!skip_nms) {
                proposals = pp::segmatch::nms_masks(proposals, iou_threshold, confidence_floor);
            }
            const auto assignments =
                pp::segmatch::assign_proposals(proposals, references, min_score);
            nlohmann::json doc = nlohmann::json::array();
            for (const auto& a : assignments) {
                nlohmann::json entry = {{"proposal_index", a.proposal_index},
                                        {"score", a.score}};
                if (a.class_id) {
                    entry["class_id"] = *a.class_id;
                } else {
                    entry["class_id"] = nullptr;
                }
                doc.push_back(entry);
            }
            emit(doc, seg_out);
        } else if (loss->parsed()) {
            const auto stages = pp::serialize::load_loss_replay(loss_input);
            const pp::LossBreakdown lb = pp::total_loss(stages);
            emit(pp::serialize::loss_breakdown_to_json(lb), loss_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
