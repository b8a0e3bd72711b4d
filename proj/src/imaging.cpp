// SPDX-License-Identifier: Apache-2.0
#include "handgeo/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace handgeo::imaging {

namespace {

constexpr int kMinDimension = 32;

void check_dimensions(int width, int height, const std::string& context) {
    if (width < kMinDimension || height < kMinDimension)
        fail(ErrorCode::ImageTooSmall,
             context + ": " + std::to_string(width) + "x" + std::to_string(height) +
                 " is below the " + std::to_string(kMinDimension) + "x" +
                 std::to_string(kMinDimension) + " minimum");
}

int clamp_index(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

}  // namespace

size_t BinaryImage::count_foreground() const {
    return static_cast<size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

size_t EdgeMap::count_edges() const {
    return static_cast<size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

GrayImage make_gray(int width, int height, double fill) {
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<size_t>(width) * height, fill);
    return img;
}

BinaryImage make_binary(int width, int height, bool fill) {
    BinaryImage img;
    img.width = width;
    img.height = height;
    img.bits.assign(static_cast<size_t>(width) * height, fill ? 1 : 0);
    return img;
}

namespace {

// --- PGM -------------------------------------------------------------------

int pgm_next_token(std::istream& in, std::string& token) {
    token.clear();
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!token.empty()) return 0;
            continue;
        }
        token.push_back(static_cast<char>(c));
    }
    return token.empty() ? -1 : 0;
}

GrayImage load_pgm(std::ifstream& in, const std::string& path) {
    std::string tok;
    auto next_int = [&](const char* what) {
        if (pgm_next_token(in, tok) != 0)
            fail(ErrorCode::UnsupportedFormat, path + ": truncated PGM header (" + what + ")");
        try {
            return std::stoi(tok);
        } catch (const std::exception&) {
            fail(ErrorCode::UnsupportedFormat, path + ": bad PGM header token '" + tok + "'");
        }
    };
    const int width = next_int("width");
    const int height = next_int("height");
    const int maxval = next_int("maxval");
    if (maxval != 255)
        fail(ErrorCode::UnsupportedFormat, path + ": PGM maxval must be 255, got " + tok);
    if (width <= 0 || height <= 0)
        fail(ErrorCode::UnsupportedFormat, path + ": non-positive PGM dimensions");
    check_dimensions(width, height, path);

    GrayImage img = make_gray(width, height);
    std::vector<std::uint8_t> row(static_cast<size_t>(width));
    for (int y = 0; y < height; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), width);
        if (in.gcount() != width) fail(ErrorCode::IoError, path + ": truncated PGM pixel data");
        for (int x = 0; x < width; ++x) img.at(x, y) = row[x] / 255.0;
    }
    return img;
}

// --- BMP -------------------------------------------------------------------

std::uint32_t rd_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

GrayImage load_bmp(std::ifstream& in, const std::string& path) {
    std::uint8_t header[54];
    in.read(reinterpret_cast<char*>(header), 54);
    if (in.gcount() != 54) fail(ErrorCode::UnsupportedFormat, path + ": truncated BMP header");
    if (header[0] != 'B' || header[1] != 'M')
        fail(ErrorCode::UnsupportedFormat, path + ": not a BMP file");

    const std::uint32_t data_offset = rd_u32(header + 10);
    const std::uint32_t info_size = rd_u32(header + 14);
    if (info_size < 40)
        fail(ErrorCode::UnsupportedFormat, path + ": unsupported BMP header variant");
    const std::int32_t width = static_cast<std::int32_t>(rd_u32(header + 18));
    const std::int32_t raw_height = static_cast<std::int32_t>(rd_u32(header + 22));
    const std::uint16_t bpp = rd_u16(header + 28);
    const std::uint32_t compression = rd_u32(header + 30);
    std::uint32_t palette_entries = rd_u32(header + 46);

    if (bpp != 8) fail(ErrorCode::UnsupportedFormat, path + ": BMP must be 8 bits per pixel");
    if (compression != 0)
        fail(ErrorCode::UnsupportedFormat, path + ": compressed BMP is not supported");
    const bool top_down = raw_height < 0;
    const std::int32_t height = top_down ? -raw_height : raw_height;
    if (width <= 0 || height <= 0)
        fail(ErrorCode::UnsupportedFormat, path + ": bad BMP dimensions");
    check_dimensions(width, height, path);

    if (palette_entries == 0) palette_entries = 256;
    // Skip any remaining info-header bytes, then read the palette.
    in.seekg(14 + static_cast<std::streamoff>(info_size), std::ios::beg);
    std::vector<std::uint8_t> palette(static_cast<size_t>(palette_entries) * 4);
    in.read(reinterpret_cast<char*>(palette.data()), static_cast<std::streamsize>(palette.size()));
    if (in.gcount() != static_cast<std::streamsize>(palette.size()))
        fail(ErrorCode::UnsupportedFormat, path + ": truncated BMP palette");
    std::vector<double> gray(256, 0.0);
    for (std::uint32_t i = 0; i < palette_entries && i < 256; ++i) {
        const std::uint8_t b = palette[i * 4], g = palette[i * 4 + 1], r = palette[i * 4 + 2];
        if (r != g || g != b)
            fail(ErrorCode::UnsupportedFormat, path + ": BMP palette is not grayscale");
        gray[i] = r / 255.0;
    }

    const size_t stride = (static_cast<size_t>(width) + 3) & ~size_t{3};
    in.seekg(data_offset, std::ios::beg);
    GrayImage img = make_gray(width, height);
    std::vector<std::uint8_t> row(stride);
    for (int r = 0; r < height; ++r) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(stride));
        if (in.gcount() != static_cast<std::streamsize>(stride))
            fail(ErrorCode::IoError, path + ": truncated BMP pixel data");
        const int y = top_down ? r : height - 1 - r;
        for (int x = 0; x < width; ++x) img.at(x, y) = gray[row[x]];
    }
    return img;
}

}  // namespace

GrayImage load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, path + ": cannot open file");
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2) fail(ErrorCode::UnsupportedFormat, path + ": file too short");
    if (magic[0] == 'P' && magic[1] == '5') return load_pgm(in, path);
    if (magic[0] == 'B' && magic[1] == 'M') {
        in.seekg(0, std::ios::beg);
        return load_bmp(in, path);
    }
    fail(ErrorCode::UnsupportedFormat, path + ": expected 8-bit grayscale PGM (P5) or BMP");
}

namespace {

void write_pgm_bytes(const std::string& path, int width, int height,
                     const std::vector<std::uint8_t>& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, path + ": cannot open for writing");
        out << "P5\n" << width << " " << height << "\n255\n";
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) fail(ErrorCode::IoError, path + ": write failed");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void save_pgm(const GrayImage& img, const std::string& path) {
    std::vector<std::uint8_t> bytes(img.pixels.size());
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, 1.0);
        bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    write_pgm_bytes(path, img.width, img.height, bytes);
}

void save_mask_pgm(const BinaryImage& mask, const std::string& path) {
    std::vector<std::uint8_t> bytes(mask.bits.size());
    for (size_t i = 0; i < mask.bits.size(); ++i) bytes[i] = mask.bits[i] ? 255 : 0;
    write_pgm_bytes(path, mask.width, mask.height, bytes);
}

void save_mask_pgm(const EdgeMap& edges, const std::string& path) {
    std::vector<std::uint8_t> bytes(edges.bits.size());
    for (size_t i = 0; i < edges.bits.size(); ++i) bytes[i] = edges.bits[i] ? 255 : 0;
    write_pgm_bytes(path, edges.width, edges.height, bytes);
}

GrayImage lowpass_filter(const GrayImage& img, int radius) {
    if (radius < 1) fail(ErrorCode::InvalidArgument, "lowpass radius must be >= 1");
    const int w = img.width, h = img.height;
    // Two replicated-border passes with a fresh window sum per pixel; this
    // stays within rounding distance of a direct 2-D convolution.
    GrayImage horiz = make_gray(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int dx = -radius; dx <= radius; ++dx) sum += img.at(clamp_index(x + dx, w), y);
            horiz.at(x, y) = sum;
        }
    }
    GrayImage out = make_gray(w, h);
    const double norm = 1.0 / ((2.0 * radius + 1) * (2.0 * radius + 1));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int dy = -radius; dy <= radius; ++dy) sum += horiz.at(x, clamp_index(y + dy, h));
            out.at(x, y) = sum * norm;
        }
    }
    out.dpi = img.dpi;
    return out;
}

BinaryImage binarize(const GrayImage& img, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        fail(ErrorCode::InvalidThreshold, "threshold must lie in (0,1), got " +
                                              std::to_string(threshold));
    BinaryImage out = make_binary(img.width, img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i) out.bits[i] = img.pixels[i] >= threshold ? 1 : 0;
    return out;
}

BinaryImage complement(const BinaryImage& mask) {
    BinaryImage out = mask;
    for (auto& b : out.bits) b = b ? 0 : 1;
    return out;
}

GrayImage to_gray(const BinaryImage& mask) {
    GrayImage out = make_gray(mask.width, mask.height);
    for (size_t i = 0; i < mask.bits.size(); ++i) out.pixels[i] = mask.bits[i] ? 1.0 : 0.0;
    return out;
}

EdgeMap detect_edges(const BinaryImage& mask, double sigma, double magnitude_floor) {
    if (sigma <= 0.0) fail(ErrorCode::InvalidArgument, "sigma must be positive");
    if (mask.count_foreground() == 0)
        fail(ErrorCode::EmptyForeground, "detect_edges requires at least one foreground pixel");

    const int w = mask.width, h = mask.height;
    const int half = static_cast<int>(std::ceil(3.0 * sigma));

    // Factored LoG: Gaussian smoothing followed by a discrete Laplacian. The
    // composite kernel sums to exactly zero, so constant regions respond with
    // exact zeros instead of truncation residue.
    std::vector<double> gauss(static_cast<size_t>(2 * half + 1));
    double gsum = 0.0;
    for (int d = -half; d <= half; ++d) {
        const double v = std::exp(-(static_cast<double>(d) * d) / (2.0 * sigma * sigma));
        gauss[static_cast<size_t>(d + half)] = v;
        gsum += v;
    }
    for (auto& v : gauss) v /= gsum;

    std::vector<double> horiz(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = -half; d <= half; ++d)
                if (mask.bits[static_cast<size_t>(y) * w + clamp_index(x + d, w)])
                    acc += gauss[static_cast<size_t>(d + half)];
            horiz[static_cast<size_t>(y) * w + x] = acc;
        }
    }
    std::vector<double> smooth(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = -half; d <= half; ++d)
                acc += gauss[static_cast<size_t>(d + half)] *
                       horiz[static_cast<size_t>(clamp_index(y + d, h)) * w + x];
            smooth[static_cast<size_t>(y) * w + x] = acc;
        }
    }

    std::vector<double> response(static_cast<size_t>(w) * h);
    auto sm = [&](int x, int y) {
        return smooth[static_cast<size_t>(clamp_index(y, h)) * w + clamp_index(x, w)];
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            response[static_cast<size_t>(y) * w + x] =
                sm(x + 1, y) + sm(x - 1, y) + sm(x, y + 1) + sm(x, y - 1) - 4.0 * sm(x, y);

    // Zero crossings across 4-neighbor pairs; the pixel on the weaker side of
    // the crossing is marked, keeping the outline one pixel wide. Crossings
    // must reach a fraction of the peak response: the far tail of a truncated
    // LoG has faint sign changes that are not object edges.
    double peak = 0.0;
    for (const double r : response) peak = std::max(peak, std::abs(r));
    const double floor = std::max(magnitude_floor, 1e-3 * peak);

    EdgeMap edges;
    edges.width = w;
    edges.height = h;
    edges.bits.assign(static_cast<size_t>(w) * h, 0);
    const int nx[4] = {1, -1, 0, 0};
    const int ny[4] = {0, 0, 1, -1};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double rp = response[static_cast<size_t>(y) * w + x];
            bool strong_pos = false, strong_neg = false;
            bool mark = false;
            for (int k = 0; k < 4 && !mark; ++k) {
                const int qx = x + nx[k], qy = y + ny[k];
                if (qx < 0 || qx >= w || qy < 0 || qy >= h) continue;
                const double rq = response[static_cast<size_t>(qy) * w + qx];
                strong_pos = strong_pos || rq > floor;
                strong_neg = strong_neg || rq < -floor;
                if (rp * rq < 0.0 && std::max(std::abs(rp), std::abs(rq)) > floor &&
                    std::abs(rp) <= std::abs(rq))
                    mark = true;
            }
            // A pixel the response line passes through exactly: zero value
            // flanked by strong responses of both signs.
            if (rp == 0.0 && strong_pos && strong_neg) mark = true;
            if (mark) edges.bits[static_cast<size_t>(y) * w + x] = 1;
        }
    }
    return edges;
}

}  // namespace handgeo::imaging
