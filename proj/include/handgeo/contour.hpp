// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "handgeo/imaging.hpp"

namespace handgeo::contour {

struct Point {
    int x = 0;
    int y = 0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Eight-direction chain code of a closed boundary. Code 0 steps toward +x;
/// codes increase counterclockwise in 45-degree increments (image y grows
/// downward, so code 2 steps toward -y and code 6 toward +y).
struct ChainCode {
    Point start;
    std::vector<std::uint8_t> codes;
    // Dimensions of the traced image; 0 when unknown (e.g. parsed from text).
    int width = 0;
    int height = 0;
};

/// Displacement of one chain step.
Point code_delta(std::uint8_t code);

/// Contour points p_0..p_{L-1} with p_0 = start; step i moves p_i to p_{i+1 mod L}.
std::vector<Point> contour_points(const ChainCode& chain);

/// Fingertip/valley/wrist positions as indices into contour_points().
/// Tips run thumb..little in contour order; wrist.first is the index on the
/// thumb side (descent start), wrist.second on the little-finger side.
struct Landmarks {
    std::array<size_t, 5> tips{};
    std::array<size_t, 4> valleys{};
    std::pair<size_t, size_t> wrist{};
};

/// Moore-neighbor boundary trace of the largest 8-connected component,
/// clockwise in image coordinates from the topmost-then-leftmost pixel.
ChainCode trace_contour(const imaging::BinaryImage& mask, size_t min_component_pixels = 64);

/// Sum of step lengths: even codes count 1, odd codes sqrt(2).
double perimeter(const ChainCode& chain);

/// Absolute shoelace area of the boundary polygon (pixel centers).
double enclosed_area(const ChainCode& chain);

/// Locates 5 fingertips, 4 valleys and the wrist pair on a hand silhouette
/// traced with fingers pointing toward +y. Throws DefectiveAcquisition when
/// the silhouette does not expose exactly that structure (joined or cut
/// fingers, non-hand blobs).
Landmarks find_landmarks(const ChainCode& chain);

/// Text form: first line "x y" of the start pixel, second line the code digits.
std::string chain_to_text(const ChainCode& chain);
ChainCode chain_from_text(const std::string& text);

}  // namespace handgeo::contour
