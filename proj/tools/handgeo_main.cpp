// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the hand-geometry recognition toolkit:
//   synth    generate a synthetic dataset with ground truth
//   extract  run preprocessing + measurement over an image directory
//   train    fit a gallery model from a feature store
//   eval     identification / verification metrics for a model or classifier
//   det      export the DET curve of a trained gallery

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "handgeo/pipeline.hpp"
#include "handgeo/synth.hpp"

namespace {

using namespace handgeo;

struct CommonEvalFlags {
    std::string features_path;
    std::string gallery_path;
    std::string classifier = "";
    std::string train_acqs = "1-5";
    std::string test_acqs = "6-10";
    std::string metric = "mse";
    int epochs = 10;
    bool msereg = false;
    double gamma = 0.9;
    int starts = 1;
    std::uint64_t seed = 0;
    double p_true = 0.5;
    bool no_clamp = false;
};

pipeline::ExperimentConfig to_config(const CommonEvalFlags& flags) {
    pipeline::ExperimentConfig cfg;
    cfg.classifier = pipeline::parse_classifier(flags.classifier);
    if (!cfg.classifier.metric_embedded)
        cfg.classifier.metric =
            flags.metric == "mad" ? codes::DecodeMetric::Mad : codes::DecodeMetric::Mse;
    cfg.train_acqs = pipeline::parse_acq_range(flags.train_acqs);
    cfg.test_acqs = pipeline::parse_acq_range(flags.test_acqs);
    cfg.epochs = flags.epochs;
    cfg.msereg = flags.msereg;
    cfg.gamma = flags.gamma;
    cfg.starts = flags.starts;
    cfg.seed = flags.seed;
    cfg.p_true = flags.p_true;
    cfg.no_clamp = flags.no_clamp;
    return cfg;
}

void print_metrics(double ident, const eval::DcfResult& dcf, double p_true) {
    std::printf("identification_rate=%.6f\n", ident);
    std::printf("min_dcf=%.6f at threshold=%.9g (c_miss=1,c_fa=1,p_true=%g)\n", dcf.value,
                dcf.threshold, p_true);
}

void print_stats(const pipeline::ExperimentResult& result) {
    const auto ident = eval::run_statistics(result.ident_per_start);
    const auto dcf = eval::run_statistics(result.dcf_per_start);
    std::printf("ident_rate_stats: mean=%.6f sigma=%.6f max=%.6f\n", ident.mean, ident.sigma,
                ident.max);
    std::printf("min_dcf_stats: mean=%.6f sigma=%.6f min=%.6f\n", dcf.mean, dcf.sigma, dcf.min);
}

int run(int argc, char** argv) {
    CLI::App app{"hand-geometry biometric toolkit"};
    app.require_subcommand(1);

    // --- synth ---------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic hand dataset");
    std::string synth_out = "dataset";
    int persons = 22, acquisitions = 10;
    std::uint64_t synth_seed = 42;
    double jitter = 1.0;
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--persons", persons, "number of persons");
    synth_cmd->add_option("--acquisitions", acquisitions, "acquisitions per person");
    synth_cmd->add_option("--seed", synth_seed, "master seed");
    synth_cmd->add_option("--jitter", jitter, "per-acquisition geometric jitter sigma, px");

    // --- extract -------------------------------------------------------
    auto* extract_cmd = app.add_subcommand("extract", "measure features over an image directory");
    std::string extract_dataset, extract_out = "features.csv";
    pipeline::ExtractOptions extract_opts;
    extract_cmd->add_option("--dataset", extract_dataset, "image directory")->required();
    extract_cmd->add_option("--out", extract_out, "feature CSV path")->required();
    extract_cmd->add_option("--threshold-bin", extract_opts.threshold, "binarization threshold");
    extract_cmd->add_option("--radius", extract_opts.filter_radius, "box filter radius (0 = off)");
    extract_cmd->add_option("--sigma-log", extract_opts.log_sigma, "LoG sigma for edge maps");
    extract_cmd->add_option("--edges-dir", extract_opts.edges_dir,
                            "also write LoG edge maps into this directory");
    extract_cmd->add_flag("--invert", extract_opts.invert, "hand darker than background");

    // --- train ---------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "fit a gallery model");
    CommonEvalFlags train_flags;
    std::string train_out = "gallery.json";
    train_cmd->add_option("--features", train_flags.features_path, "feature CSV")->required();
    train_cmd->add_option("--out", train_out, "gallery model path")->required();
    train_cmd->add_option("--classifier", train_flags.classifier,
                          "nn-mse | nn-mad | mlp-opc:H | mlp-peruser:H | "
                          "mlp-ecoc:BCH(n,k):metric | mlp-ecoc:random:bits:iters")
        ->required();
    train_cmd->add_option("--metric", train_flags.metric, "mse | mad");
    train_cmd->add_option("--train-acqs", train_flags.train_acqs, "training acquisitions");
    train_cmd->add_option("--epochs", train_flags.epochs, "training epochs");
    train_cmd->add_flag("--msereg", train_flags.msereg, "regularized objective");
    train_cmd->add_option("--gamma", train_flags.gamma, "MSEREG performance ratio");
    train_cmd->add_option("--starts", train_flags.starts, "multi-start count");
    train_cmd->add_option("--seed", train_flags.seed, "training seed");
    train_cmd->add_flag("--no-clamp", train_flags.no_clamp, "do not clamp scaled features");

    // --- eval ----------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "identification / verification evaluation");
    CommonEvalFlags eval_flags;
    std::string scores_out, det_out;
    eval_cmd->add_option("--features", eval_flags.features_path, "feature CSV")->required();
    eval_cmd->add_option("--gallery", eval_flags.gallery_path, "trained gallery model");
    eval_cmd->add_option("--classifier", eval_flags.classifier,
                         "train-and-evaluate classifier spec (alternative to --gallery)");
    eval_cmd->add_option("--metric", eval_flags.metric, "mse | mad");
    eval_cmd->add_option("--train-acqs", eval_flags.train_acqs, "training acquisitions");
    eval_cmd->add_option("--test-acqs", eval_flags.test_acqs, "testing acquisitions");
    eval_cmd->add_option("--epochs", eval_flags.epochs, "training epochs");
    eval_cmd->add_flag("--msereg", eval_flags.msereg, "regularized objective");
    eval_cmd->add_option("--gamma", eval_flags.gamma, "MSEREG performance ratio");
    eval_cmd->add_option("--starts", eval_flags.starts, "multi-start count");
    eval_cmd->add_option("--seed", eval_flags.seed, "training seed");
    eval_cmd->add_option("--ptrue", eval_flags.p_true, "target prior for the DCF");
    eval_cmd->add_flag("--no-clamp", eval_flags.no_clamp, "do not clamp scaled features");
    eval_cmd->add_option("--scores", scores_out, "write the similarity tensor CSV here");
    eval_cmd->add_option("--det", det_out, "write the DET curve CSV here");

    // --- det -----------------------------------------------------------
    auto* det_cmd = app.add_subcommand("det", "export the DET curve of a gallery");
    std::string det_features, det_gallery, det_path = "det.csv";
    std::string det_test_acqs = "6-10";
    double det_ptrue = 0.5;
    det_cmd->add_option("--features", det_features, "feature CSV")->required();
    det_cmd->add_option("--gallery", det_gallery, "trained gallery model")->required();
    det_cmd->add_option("--out", det_path, "DET CSV path")->required();
    det_cmd->add_option("--test-acqs", det_test_acqs, "testing acquisitions");
    det_cmd->add_option("--ptrue", det_ptrue, "target prior for the reported DCF");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (synth_cmd->parsed()) {
        const synth::DatasetResult result =
            synth::make_dataset(synth_out, persons, acquisitions, synth_seed, jitter);
        std::printf("wrote %zu images and %s (%d slots regenerated)\n",
                    result.image_paths.size(), result.ground_truth_csv.c_str(),
                    result.regenerated);
        return 0;
    }

    if (extract_cmd->parsed()) {
        const pipeline::ExtractResult result =
            pipeline::extract_directory(extract_dataset, extract_opts);
        for (const auto& reject : result.rejects)
            std::fprintf(stderr, "rejected: %s: %s\n", reject.file.c_str(),
                         reject.reason.c_str());
        features::save_feature_csv(result.rows, extract_out);
        std::printf("extracted %zu feature rows to %s (%zu rejected)\n", result.rows.size(),
                    extract_out.c_str(), result.rejects.size());
        return 0;
    }

    if (train_cmd->parsed()) {
        const auto rows = features::load_feature_csv(train_flags.features_path);
        const pipeline::ExperimentConfig cfg = to_config(train_flags);
        const classify::GalleryModel gallery = pipeline::train_gallery(rows, cfg);
        classify::save_gallery(gallery, train_out);
        std::printf("trained %s gallery for %d persons -> %s\n", train_flags.classifier.c_str(),
                    gallery.persons, train_out.c_str());
        return 0;
    }

    if (eval_cmd->parsed()) {
        const auto rows = features::load_feature_csv(eval_flags.features_path);
        if (!eval_flags.gallery_path.empty()) {
            const classify::GalleryModel gallery = classify::load_gallery(eval_flags.gallery_path);
            const auto test_acqs = pipeline::parse_acq_range(eval_flags.test_acqs);
            const eval::SimilarityTensor tensor =
                pipeline::build_tensor(gallery, rows, test_acqs);
            const auto [genuine, impostor] = eval::split_scores(tensor);
            const auto dcf = eval::min_dcf(genuine, impostor, 1.0, 1.0, eval_flags.p_true);
            print_metrics(eval::identification_rate(tensor), dcf, eval_flags.p_true);
            if (!scores_out.empty()) eval::save_score_csv(tensor, scores_out);
            if (!det_out.empty()) eval::save_det_csv(eval::det_curve(genuine, impostor), det_out);
            return 0;
        }
        if (eval_flags.classifier.empty())
            fail(ErrorCode::InvalidArgument, "eval needs --gallery or --classifier");
        const pipeline::ExperimentConfig cfg = to_config(eval_flags);
        const pipeline::ExperimentResult result = pipeline::run_experiment(rows, cfg);
        print_metrics(result.identification_rate, result.dcf, cfg.p_true);
        if (cfg.starts > 1) print_stats(result);
        if (!scores_out.empty()) eval::save_score_csv(result.tensor, scores_out);
        if (!det_out.empty()) {
            const auto [genuine, impostor] = eval::split_scores(result.tensor);
            eval::save_det_csv(eval::det_curve(genuine, impostor), det_out);
        }
        return 0;
    }

    if (det_cmd->parsed()) {
        const auto rows = features::load_feature_csv(det_features);
        const classify::GalleryModel gallery = classify::load_gallery(det_gallery);
        const eval::SimilarityTensor tensor =
            pipeline::build_tensor(gallery, rows, pipeline::parse_acq_range(det_test_acqs));
        const auto [genuine, impostor] = eval::split_scores(tensor);
        eval::save_det_csv(eval::det_curve(genuine, impostor), det_path);
        const auto dcf = eval::min_dcf(genuine, impostor, 1.0, 1.0, det_ptrue);
        std::printf("wrote %s\n", det_path.c_str());
        std::printf("min_dcf=%.6f at threshold=%.9g (c_miss=1,c_fa=1,p_true=%g)\n", dcf.value,
                    dcf.threshold, det_ptrue);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const handgeo::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
