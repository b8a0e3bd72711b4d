// SPDX-License-Identifier: Apache-2.0
#include "handgeo/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace handgeo::features {

namespace {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

Vec2 to_vec(const contour::Point& p) { return {static_cast<double>(p.x), static_cast<double>(p.y)}; }

Vec2 midpoint(Vec2 a, Vec2 b) { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Width of the silhouette along the line through `center` with direction
/// `dir`: distance between the nearest boundary crossings on each side.
double chord_width(const std::vector<contour::Point>& pts, Vec2 center, Vec2 dir) {
    constexpr double kEps = 1e-9;
    double t_pos = std::numeric_limits<double>::infinity();
    double t_neg = -std::numeric_limits<double>::infinity();
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = to_vec(pts[i]);
        const Vec2 b = to_vec(pts[(i + 1) % n]);
        const Vec2 edge{b.x - a.x, b.y - a.y};
        const double denom = cross(dir, edge);
        if (std::abs(denom) < kEps) continue;
        const Vec2 offset{a.x - center.x, a.y - center.y};
        const double s = cross(offset, dir) / denom;
        if (s < 0.0 || s >= 1.0) continue;
        const double t = cross(offset, edge) / denom;
        if (t > kEps) t_pos = std::min(t_pos, t);
        if (t < -kEps) t_neg = std::max(t_neg, t);
    }
    if (!std::isfinite(t_pos) || !std::isfinite(t_neg))
        fail(ErrorCode::DefectiveAcquisition, "finger width chord does not cross the contour");
    return t_pos - t_neg;
}

}  // namespace

FeatureVector measure(const contour::ChainCode& chain, const contour::Landmarks& lm) {
    const auto pts = contour::contour_points(chain);
    const Vec2 wrist_thumb = to_vec(pts[lm.wrist.first]);
    const Vec2 wrist_little = to_vec(pts[lm.wrist.second]);
    Vec2 tips[5];
    for (int i = 0; i < 5; ++i) tips[i] = to_vec(pts[lm.tips[i]]);
    Vec2 valleys[4];
    for (int i = 0; i < 4; ++i) valleys[i] = to_vec(pts[lm.valleys[i]]);

    // Base segment of finger k joins its flanking valleys; the thumb and
    // little finger use the wrist point on their side instead.
    Vec2 base_a[5] = {wrist_thumb, valleys[0], valleys[1], valleys[2], valleys[3]};
    Vec2 base_b[5] = {valleys[0], valleys[1], valleys[2], valleys[3], wrist_little};

    FeatureVector fv;
    fv.schema = Schema::Full13;
    fv.values.assign(kFull13Size, 0.0);

    Vec2 base_mid[5];
    for (int i = 0; i < 5; ++i) {
        base_mid[i] = midpoint(base_a[i], base_b[i]);
        fv.values[i] = dist(tips[i], base_mid[i]);  // f1..f5 finger lengths
    }
    fv.values[5] = dist(wrist_thumb, wrist_little);  // f6 wrist length
    fv.values[6] = dist(valleys[0], wrist_thumb);    // f7 thumb base width

    // f8..f11: widths of the first..little fingers, measured on the chord
    // through the finger midpoint perpendicular to the finger axis. The
    // little finger's base segment reaches the wrist, so its chord anchors on
    // a local base instead: the ring-little valley mirrored across the tip
    // along the contour.
    for (int i = 1; i < 5; ++i) {
        Vec2 local_base = base_mid[i];
        if (i == 4) {
            const size_t mirrored =
                std::min(pts.size() - 1, 2 * lm.tips[4] - lm.valleys[3]);
            local_base = midpoint(valleys[3], to_vec(pts[mirrored]));
        }
        const Vec2 axis{tips[i].x - local_base.x, tips[i].y - local_base.y};
        const double len = std::hypot(axis.x, axis.y);
        if (len < 1.0)
            fail(ErrorCode::DefectiveAcquisition, "degenerate finger axis");
        const Vec2 normal{-axis.y / len, axis.x / len};
        const Vec2 center = midpoint(tips[i], local_base);
        fv.values[6 + i] = chord_width(pts, center, normal);
    }

    fv.values[11] = contour::perimeter(chain);     // f12
    fv.values[12] = contour::enclosed_area(chain);  // f13
    return fv;
}

FeatureVector select(const FeatureVector& full) {
    if (full.schema != Schema::Full13 || full.values.size() != kFull13Size)
        fail(ErrorCode::WrongSchema, "select requires a Full13 vector");
    static constexpr int kKeep[kSelected9Size] = {1, 2, 3, 4, 7, 8, 9, 10, 11};  // 0-based
    FeatureVector out;
    out.schema = Schema::Selected9;
    out.values.reserve(kSelected9Size);
    for (const int idx : kKeep) out.values.push_back(full.values[idx]);
    return out;
}

ScalingParams fit_scaling(const std::vector<FeatureVector>& train) {
    if (train.empty()) fail(ErrorCode::EmptyTrainingSet, "fit_scaling needs >= 1 vector");
    const size_t dims = train.front().values.size();
    ScalingParams params;
    params.min.assign(dims, std::numeric_limits<double>::infinity());
    params.max.assign(dims, -std::numeric_limits<double>::infinity());
    for (const auto& fv : train) {
        if (fv.values.size() != dims)
            fail(ErrorCode::SchemaMismatch, "training vectors have mixed dimensions");
        for (size_t d = 0; d < dims; ++d) {
            params.min[d] = std::min(params.min[d], fv.values[d]);
            params.max[d] = std::max(params.max[d], fv.values[d]);
        }
    }
    return params;
}

FeatureVector scale(const FeatureVector& fv, const ScalingParams& params, bool clamp) {
    if (fv.values.size() != params.min.size())
        fail(ErrorCode::SchemaMismatch, "vector dimension does not match scaling parameters");
    FeatureVector out = fv;
    for (size_t d = 0; d < fv.values.size(); ++d) {
        const double lo = params.min[d], hi = params.max[d];
        if (hi == lo) {
            out.values[d] = 0.0;
            continue;
        }
        double v = 2.0 * (fv.values[d] - lo) / (hi - lo) - 1.0;
        if (clamp) v = std::clamp(v, -1.0, 1.0);
        out.values[d] = v;
    }
    return out;
}

void save_feature_csv(const std::vector<FeatureRow>& rows, const std::string& path) {
    const size_t dims = rows.empty() ? kFull13Size : rows.front().features.values.size();
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, path + ": cannot open for writing");
        out << "person,acquisition";
        for (size_t d = 1; d <= dims; ++d) out << ",f" << d;
        out << "\n";
        char buf[64];
        for (const auto& row : rows) {
            if (row.features.values.size() != dims)
                fail(ErrorCode::SchemaMismatch, "feature rows have mixed schemas");
            out << row.person << "," << row.acquisition;
            for (const double v : row.features.values) {
                std::snprintf(buf, sizeof(buf), "%.12g", v);
                out << "," << buf;
            }
            out << "\n";
        }
        if (!out) fail(ErrorCode::IoError, path + ": write failed");
    }
    std::filesystem::rename(tmp, path);
}

std::vector<FeatureRow> load_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::IoError, path + ": empty feature store");
    size_t dims = 0;
    {
        std::istringstream header(line);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(header, col, ',')) cols.push_back(col);
        if (cols.size() < 3 || cols[0] != "person" || cols[1] != "acquisition")
            fail(ErrorCode::UnsupportedFormat, path + ": bad feature store header");
        dims = cols.size() - 2;
    }
    if (dims != kFull13Size && dims != kSelected9Size)
        fail(ErrorCode::UnsupportedFormat,
             path + ": expected 13 or 9 feature columns, got " + std::to_string(dims));

    std::vector<FeatureRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        FeatureRow row;
        row.features.schema = dims == kFull13Size ? Schema::Full13 : Schema::Selected9;
        int col = 0;
        while (std::getline(ls, field, ',')) {
            try {
                if (col == 0)
                    row.person = std::stoi(field);
                else if (col == 1)
                    row.acquisition = std::stoi(field);
                else
                    row.features.values.push_back(std::stod(field));
            } catch (const std::exception&) {
                fail(ErrorCode::UnsupportedFormat, path + ": bad CSV field '" + field + "'");
            }
            ++col;
        }
        if (row.features.values.size() != dims)
            fail(ErrorCode::UnsupportedFormat, path + ": row with wrong column count");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace handgeo::features
