// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "handgeo/features.hpp"
#include "handgeo/imaging.hpp"

namespace handgeo::synth {

/// Finger order everywhere: thumb, first, middle, ring, little.
struct FingerParams {
    double length = 0.0;       // px, base to fingertip extreme
    double width = 0.0;        // px, capsule diameter
    double base_offset = 0.0;  // fraction of palm width from the palm's left edge
    double tilt_deg = 0.0;     // from straight down (+y), positive toward +x
};

/// Person-level hand geometry on the 850x945 canvas (100 dpi over a 216x240mm
/// scanner bed). The thumb sits on the right so a clockwise trace meets the
/// fingers thumb-first.
struct HandParams {
    std::array<FingerParams, 5> fingers;
    double palm_width = 0.0;
    double palm_height = 0.0;
    double wrist_width = 0.0;
    double center_x = 0.0;
    double palm_top = 0.0;
    double jitter_sigma = 1.0;  // per-acquisition geometric jitter, px
};

constexpr int kCanvasWidth = 850;
constexpr int kCanvasHeight = 945;

struct Vec {
    double x = 0.0;
    double y = 0.0;
};

/// Exact geometry of one rendered acquisition.
struct GroundTruth {
    std::array<Vec, 5> tips;     // capsule extreme points, thumb..little
    std::array<Vec, 4> valleys;  // inter-finger gap midpoints on the palm edge
    Vec wrist_left;              // little-finger side, on the top border
    Vec wrist_right;             // thumb side
    features::FeatureVector full13;
};

struct Acquisition {
    imaging::GrayImage image;
    GroundTruth truth;
};

/// Draws person-level parameters from the valid ranges; resamples draws that
/// violate the finger separation invariant. Deterministic per seed.
HandParams sample_person(std::uint64_t seed);

/// Rasterizes the hand (palm and forearm rectangles plus finger capsules,
/// intensity 0.85 on an 0.02 background), applies per-acquisition geometric
/// jitter and additive Gaussian pixel noise, and reports the exact geometry.
Acquisition render(const HandParams& params, std::uint64_t acquisition_seed,
                   double pixel_noise_sigma = 0.01);

enum class DefectKind { MergedFingers, CutFinger };

/// Derives a deliberately bad acquisition: two fingers close enough to fuse,
/// or the hand shifted until a fingertip leaves the frame.
HandParams make_defective(const HandParams& params, DefectKind kind);

struct DatasetResult {
    std::vector<std::string> image_paths;  // p<person>_a<acq>.pgm, 1-based ids
    std::string ground_truth_csv;
    int regenerated = 0;  // slots that needed a retry
};

/// Writes persons x acquisitions PGM images plus the ground-truth CSV.
/// Acquisitions whose silhouette fails the standard preprocessing pipeline
/// are regenerated with a derived seed, up to 100 attempts per slot.
DatasetResult make_dataset(const std::string& out_dir, int persons, int acquisitions,
                           std::uint64_t master_seed, double jitter_sigma = 1.0);

/// Ground-truth CSV access (header person,acq,tip1x..tip5y,f1..f13).
struct TruthRow {
    int person = 0;
    int acquisition = 0;
    GroundTruth truth;
};
std::vector<TruthRow> load_truth_csv(const std::string& path);

}  // namespace handgeo::synth
