// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "handgeo/core.hpp"

namespace handgeo::imaging {

/// 8-bit grayscale raster normalized to [0,1] intensities, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // size width*height, values in [0,1]
    int dpi = 100;               // informational only

    double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
};

/// Row-major boolean mask; true = hand (white), false = background (black).
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // 0/1, size width*height

    bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    size_t count_foreground() const;
};

/// One-pixel-wide edge mask produced by Laplacian-of-Gaussian zero crossings.
struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    size_t count_edges() const;
};

GrayImage make_gray(int width, int height, double fill = 0.0);
BinaryImage make_binary(int width, int height, bool fill = false);

/// Loads an 8-bit grayscale PGM (P5, maxval 255) or uncompressed 8-bit BMP.
/// Intensities are the stored bytes divided by 255.
GrayImage load_image(const std::string& path);

void save_pgm(const GrayImage& img, const std::string& path);
void save_mask_pgm(const BinaryImage& mask, const std::string& path);
void save_mask_pgm(const EdgeMap& edges, const std::string& path);

/// Separable box average over a (2*radius+1)^2 window, borders replicated.
GrayImage lowpass_filter(const GrayImage& img, int radius = 2);

/// Thresholding: bit = intensity >= threshold.
BinaryImage binarize(const GrayImage& img, double threshold = 0.07);

BinaryImage complement(const BinaryImage& mask);

/// Converts a mask to {0,1} intensities (used to restate binarize idempotence).
GrayImage to_gray(const BinaryImage& mask);

/// Laplacian-of-Gaussian zero-crossing edge detection on a 0/1 mask.
/// Kernel half-width is ceil(3*sigma); replicated borders; a crossing is kept
/// when the stronger side of the sign change exceeds `magnitude_floor`.
EdgeMap detect_edges(const BinaryImage& mask, double sigma = 2.0,
                     double magnitude_floor = 1e-8);

}  // namespace handgeo::imaging
