// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "handgeo/core.hpp"

namespace handgeo::eval {

/// s(i, j, k): similarity of trial k of person i against the model of
/// person j. N persons, fixed trial count per person.
struct SimilarityTensor {
    int persons = 0;
    int trials = 0;
    std::vector<double> values;  // persons * persons * trials, (i, j, k) order

    double at(int i, int j, int k) const {
        return values[(static_cast<size_t>(i) * persons + j) * trials + k];
    }
    double& at(int i, int j, int k) {
        return values[(static_cast<size_t>(i) * persons + j) * trials + k];
    }
};

SimilarityTensor make_tensor(int persons, int trials);

/// Threshold sweep: FAR never increases and FRR never decreases with the
/// threshold; the sentinel rows reach (1,0) and (0,1).
struct DetCurve {
    struct Sample {
        double threshold;
        double far;
        double frr;
    };
    std::vector<Sample> samples;  // ascending threshold
};

/// Fraction of trials whose diagonal similarity strictly beats every
/// off-diagonal entry in its row (ties count as errors).
double identification_rate(const SimilarityTensor& tensor);

/// Diagonal scores (genuine) and off-diagonal scores (impostor).
std::pair<std::vector<double>, std::vector<double>> split_scores(const SimilarityTensor& tensor);

/// Sweeps thresholds over the union of all observed scores plus +/-infinity;
/// a probe is accepted when score >= threshold.
DetCurve det_curve(const std::vector<double>& genuine, const std::vector<double>& impostor);

struct DcfResult {
    double value = 0.0;
    double threshold = 0.0;
};

/// Minimum of c_miss * FRR * p_true + c_fa * FAR * (1 - p_true) over the DET
/// threshold set; ties resolve to the lowest threshold.
DcfResult min_dcf(const std::vector<double>& genuine, const std::vector<double>& impostor,
                  double c_miss = 1.0, double c_fa = 1.0, double p_true = 0.5);

struct RunStatistics {
    double mean = 0.0;
    double sigma = 0.0;  // sample standard deviation, 0 when n == 1
    double min = 0.0;
    double max = 0.0;
};

RunStatistics run_statistics(const std::vector<double>& values);

/// Flattened tensor exchange in the score-dump CSV layout
/// (probe_person,probe_acq,model_person,similarity).
void save_score_csv(const SimilarityTensor& tensor, const std::string& path);
SimilarityTensor load_score_csv(const std::string& path);

void save_det_csv(const DetCurve& curve, const std::string& path);

}  // namespace handgeo::eval
