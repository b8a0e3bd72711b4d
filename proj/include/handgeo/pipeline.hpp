// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "handgeo/classify.hpp"
#include "handgeo/eval.hpp"
#include "handgeo/features.hpp"

namespace handgeo::pipeline {

struct ExtractOptions {
    double threshold = 0.07;
    int filter_radius = 2;
    bool invert = false;
    double log_sigma = 2.0;       // used when edge maps are requested
    std::string edges_dir = "";   // when set, LoG edge maps are written here
};

struct Reject {
    std::string file;
    std::string reason;
};

struct ExtractResult {
    std::vector<features::FeatureRow> rows;  // Full13, one per accepted image
    std::vector<Reject> rejects;
};

/// Runs filter -> binarize -> trace -> landmarks -> measure over one image.
features::FeatureVector extract_image(const imaging::GrayImage& img, const ExtractOptions& opts);

/// Processes every p<person>_a<acq>.pgm/.bmp in the directory (sorted order);
/// captures that fail preprocessing are reported, not fatal.
ExtractResult extract_directory(const std::string& dir, const ExtractOptions& opts);

/// Classifier grammar: nn-mse | nn-mad | mlp-opc:H | mlp-peruser:H |
/// mlp-ecoc:BCH(n,k):metric | mlp-ecoc:random:bits:iters
struct ClassifierSpec {
    enum class Type { NnMse, NnMad, MlpOpc, MlpPerUser, MlpEcocBch, MlpEcocRandom };
    Type type = Type::NnMad;
    int hidden = 30;
    int bch_n = 0, bch_k = 0;
    int random_bits = 0, random_iterations = 500;
    codes::DecodeMetric metric = codes::DecodeMetric::Mse;
    bool metric_embedded = false;

    bool is_nn() const { return type == Type::NnMse || type == Type::NnMad; }
};

ClassifierSpec parse_classifier(const std::string& text);

struct ExperimentConfig {
    ClassifierSpec classifier;
    std::vector<int> train_acqs = {1, 2, 3, 4, 5};
    std::vector<int> test_acqs = {6, 7, 8, 9, 10};
    int epochs = 10;
    bool msereg = false;
    double gamma = 0.9;
    int starts = 1;
    std::uint64_t seed = 0;
    double p_true = 0.5;
    bool no_clamp = false;
};

/// Fits the gallery on the training acquisitions (best start when several).
classify::GalleryModel train_gallery(const std::vector<features::FeatureRow>& rows,
                                     const ExperimentConfig& cfg);

/// Scores every test acquisition against a trained gallery.
eval::SimilarityTensor build_tensor(const classify::GalleryModel& gallery,
                                    const std::vector<features::FeatureRow>& rows,
                                    const std::vector<int>& test_acqs);

struct ExperimentResult {
    classify::GalleryModel gallery;       // best-objective model
    eval::SimilarityTensor tensor;        // its similarity tensor
    double identification_rate = 0.0;
    eval::DcfResult dcf;
    std::vector<double> ident_per_start;  // one entry per start (size 1 for NN)
    std::vector<double> dcf_per_start;
};

/// Full protocol: train on the training split, score the test split, report
/// identification and minimum-DCF results plus per-start statistics.
ExperimentResult run_experiment(const std::vector<features::FeatureRow>& rows,
                                const ExperimentConfig& cfg);

/// Parses "1-5" or "1,2,7" into an acquisition list.
std::vector<int> parse_acq_range(const std::string& text);

}  // namespace handgeo::pipeline
