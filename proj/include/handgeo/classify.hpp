// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "handgeo/codes.hpp"
#include "handgeo/features.hpp"
#include "handgeo/mlp.hpp"

namespace handgeo::classify {

enum class GalleryKind { Nn, MlpMonolithic, MlpPerUser };

/// Enrolled recognition model. Similarity is "higher is more similar" for
/// every kind, so one evaluation harness serves all classifiers.
struct GalleryModel {
    GalleryKind kind = GalleryKind::Nn;
    int persons = 0;
    codes::DecodeMetric metric = codes::DecodeMetric::Mse;  // NN distance / ECOC decode
    features::ScalingParams scaling;                        // fitted on the training split
    bool clamp = true;

    // kind == Nn: scaled templates with their 0-based owner.
    std::vector<std::vector<double>> templates;
    std::vector<int> template_person;

    // kind == MlpMonolithic: one network plus the class codebook.
    mlp::MlpModel model;
    codes::Codebook codebook;

    // kind == MlpPerUser: one single-output network per person.
    std::vector<mlp::MlpModel> user_models;
};

/// Eq-style distances: sum of squared or absolute component differences.
double nn_distance(const std::vector<double>& x, const std::vector<double>& y,
                   codes::DecodeMetric metric);

/// Per-person similarity of a scaled probe: negated distance to the nearest
/// of that person's templates.
std::vector<double> score_nn(const GalleryModel& gallery, const std::vector<double>& probe);

/// Per-person similarity from the MLP outputs: the class unit for
/// one-per-class books, the soft Hamming score for ECOC books, or each
/// per-user network's single output.
std::vector<double> score_mlp(const GalleryModel& gallery, const std::vector<double>& probe);

/// Dispatches on the gallery kind. Probe must already be scaled.
std::vector<double> score(const GalleryModel& gallery, const std::vector<double>& probe);

struct VerifyResult {
    bool accept = false;
    double score = 0.0;
};

/// Accepts the claimed identity when its similarity reaches the threshold.
VerifyResult verify(const GalleryModel& gallery, const std::vector<double>& probe, int claimed,
                    double threshold);

void save_gallery(const GalleryModel& gallery, const std::string& path);
GalleryModel load_gallery(const std::string& path);

}  // namespace handgeo::classify
