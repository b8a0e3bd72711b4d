// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "handgeo/contour.hpp"

namespace handgeo::features {

enum class Schema { Full13, Selected9 };

/// Ordered hand measurements. Full13 follows the fixed order: five finger
/// lengths (thumb..little), wrist length, thumb base width, four finger
/// widths (first..little), perimeter, surface. Selected9 keeps the 1-based
/// indices {2,3,4,5,8,9,10,11,12}.
struct FeatureVector {
    Schema schema = Schema::Full13;
    std::vector<double> values;
};

constexpr int kFull13Size = 13;
constexpr int kSelected9Size = 9;

/// Per-dimension extrema observed on a training set.
struct ScalingParams {
    std::vector<double> min;
    std::vector<double> max;
};

/// Computes the thirteen geometric measurements from a traced contour and
/// its landmarks. Finger length is tip to base-segment midpoint; width is the
/// cross-axis chord through the finger midpoint clipped to the contour.
FeatureVector measure(const contour::ChainCode& chain, const contour::Landmarks& lm);

/// Drops features 1, 6, 7 and 13 (1-based) from a Full13 vector.
FeatureVector select(const FeatureVector& full);

ScalingParams fit_scaling(const std::vector<FeatureVector>& train);

/// Maps x to 2(x-min)/(max-min) - 1 per dimension; a degenerate dimension
/// (max == min) maps to 0. With `clamp`, outputs are clipped to [-1, 1].
FeatureVector scale(const FeatureVector& fv, const ScalingParams& params, bool clamp = true);

/// One acquisition row of the feature store.
struct FeatureRow {
    int person = 0;
    int acquisition = 0;
    FeatureVector features;
};

/// CSV store: header person,acquisition,f1..f13 (or f1..f9); one row per
/// acquisition, values with 12 significant digits.
void save_feature_csv(const std::vector<FeatureRow>& rows, const std::string& path);
std::vector<FeatureRow> load_feature_csv(const std::string& path);

}  // namespace handgeo::features
