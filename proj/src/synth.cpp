// SPDX-License-Identifier: Apache-2.0
#include "handgeo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "handgeo/contour.hpp"

namespace handgeo::synth {

namespace {

constexpr double kHandIntensity = 0.85;
constexpr double kBackgroundIntensity = 0.02;
constexpr double kDegToRad = M_PI / 180.0;

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double dist(Vec a, Vec b) { return std::hypot(a.x - b.x, a.y - b.y); }

Vec midpoint(Vec a, Vec b) { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

/// Resolved per-acquisition geometry in canvas coordinates.
struct Geometry {
    struct Capsule {
        Vec base;   // attachment point
        Vec dir;    // unit axis, pointing away from the palm
        double radius = 0.0;
        double length = 0.0;  // base to tip extreme
        Vec segment_end() const {
            return {base.x + dir.x * (length - radius), base.y + dir.y * (length - radius)};
        }
        // Landmark-rule fingertip: the lowest point of the tip arc (the
        // chain-code "maximum"), not the extreme along the tilted axis.
        Vec tip() const {
            const Vec end = segment_end();
            return {end.x, end.y + radius};
        }
    };
    std::array<Capsule, 5> fingers;
    double palm_left, palm_right, palm_top, palm_bottom;
    double forearm_left, forearm_right, forearm_bottom;
};

Geometry resolve_geometry(const HandParams& p) {
    Geometry g;
    g.palm_left = p.center_x - p.palm_width / 2.0;
    g.palm_right = p.center_x + p.palm_width / 2.0;
    g.palm_top = p.palm_top;
    g.palm_bottom = p.palm_top + p.palm_height;
    g.forearm_left = p.center_x - p.wrist_width / 2.0;
    g.forearm_right = p.center_x + p.wrist_width / 2.0;
    g.forearm_bottom = p.palm_top + 2.0;
    for (int i = 0; i < 5; ++i) {
        const FingerParams& f = p.fingers[i];
        Geometry::Capsule c;
        const double tilt = f.tilt_deg * kDegToRad;
        c.dir = {std::sin(tilt), std::cos(tilt)};
        c.radius = f.width / 2.0;
        c.length = f.length;
        double base_y = g.palm_bottom;
        if (i == 0) base_y -= 10.0 + f.width / 4.0;  // thumb attaches inside the corner
        c.base = {g.palm_left + f.base_offset * p.palm_width, base_y};
        g.fingers[i] = c;
    }
    return g;
}

/// x where the given side of a finger's boundary crosses the palm's bottom
/// edge; side = +1 for the east flank, -1 for the west flank.
double flank_crossing_x(const Geometry::Capsule& c, double y_edge, double side) {
    const double sin_t = c.dir.x, cos_t = c.dir.y;
    const double s = (y_edge - c.base.y + side * c.radius * sin_t) / cos_t;
    return c.base.x + side * c.radius * cos_t + s * sin_t;
}

GroundTruth compute_truth(const HandParams& params, const Geometry& g,
                          const imaging::BinaryImage& clean_mask) {
    GroundTruth truth;
    for (int i = 0; i < 5; ++i) truth.tips[i] = g.fingers[i].tip();
    truth.wrist_left = {g.forearm_left, 0.0};
    truth.wrist_right = {g.forearm_right, 0.0};

    // Valleys live on the palm's bottom edge, midway between the flanks of
    // the neighbouring fingers. Contour order: thumb-first, first-middle,
    // middle-ring, ring-little.
    const double yb = g.palm_bottom;
    const int west_of[4] = {1, 2, 3, 4};  // finger west of each gap
    const int east_of[4] = {0, 1, 2, 3};  // finger east of each gap
    for (int v = 0; v < 4; ++v) {
        const double west_x = flank_crossing_x(g.fingers[west_of[v]], yb, +1.0);
        const double east_x = flank_crossing_x(g.fingers[east_of[v]], yb, -1.0);
        truth.valleys[v] = {(west_x + east_x) / 2.0, yb};
    }

    features::FeatureVector& fv = truth.full13;
    fv.schema = features::Schema::Full13;
    fv.values.assign(features::kFull13Size, 0.0);
    const Vec base_a[5] = {truth.wrist_right, truth.valleys[0], truth.valleys[1], truth.valleys[2],
                           truth.valleys[3]};
    const Vec base_b[5] = {truth.valleys[0], truth.valleys[1], truth.valleys[2], truth.valleys[3],
                           truth.wrist_left};
    for (int i = 0; i < 5; ++i) fv.values[i] = dist(truth.tips[i], midpoint(base_a[i], base_b[i]));
    fv.values[5] = dist(truth.wrist_right, truth.wrist_left);
    fv.values[6] = dist(truth.valleys[0], truth.wrist_right);
    for (int i = 1; i < 5; ++i) fv.values[6 + i] = params.fingers[i].width;

    // Perimeter and surface are discrete-chain quantities; take them from the
    // noiseless silhouette.
    const auto chain = contour::trace_contour(clean_mask);
    fv.values[11] = contour::perimeter(chain);
    fv.values[12] = contour::enclosed_area(chain);
    return truth;
}

void fill_rect(imaging::BinaryImage& mask, double x0, double y0, double x1, double y1) {
    const int ix0 = std::max(0, static_cast<int>(std::ceil(x0)));
    const int ix1 = std::min(mask.width - 1, static_cast<int>(std::floor(x1)));
    const int iy0 = std::max(0, static_cast<int>(std::ceil(y0)));
    const int iy1 = std::min(mask.height - 1, static_cast<int>(std::floor(y1)));
    for (int y = iy0; y <= iy1; ++y)
        for (int x = ix0; x <= ix1; ++x) mask.set(x, y, true);
}

void fill_capsule(imaging::BinaryImage& mask, Vec a, Vec b, double radius) {
    const int ix0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius - 1)));
    const int ix1 =
        std::min(mask.width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + radius + 1)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius - 1)));
    const int iy1 =
        std::min(mask.height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + radius + 1)));
    const double abx = b.x - a.x, aby = b.y - a.y;
    const double ab2 = abx * abx + aby * aby;
    const double r2 = radius * radius;
    for (int y = iy0; y <= iy1; ++y) {
        for (int x = ix0; x <= ix1; ++x) {
            const double apx = x - a.x, apy = y - a.y;
            double t = ab2 > 0.0 ? (apx * abx + apy * aby) / ab2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double dx = apx - t * abx, dy = apy - t * aby;
            if (dx * dx + dy * dy <= r2) mask.set(x, y, true);
        }
    }
}

imaging::BinaryImage rasterize(const Geometry& g) {
    imaging::BinaryImage mask = imaging::make_binary(kCanvasWidth, kCanvasHeight);
    fill_rect(mask, g.palm_left, g.palm_top, g.palm_right, g.palm_bottom);
    fill_rect(mask, g.forearm_left, 0.0, g.forearm_right, g.forearm_bottom);
    for (const auto& finger : g.fingers)
        fill_capsule(mask, finger.base, finger.segment_end(), finger.radius);
    return mask;
}

void validate_params(const HandParams& p) {
    auto finite = [](double v) { return std::isfinite(v); };
    bool ok = finite(p.palm_width) && finite(p.palm_height) && finite(p.wrist_width) &&
              finite(p.center_x) && finite(p.palm_top) && p.palm_width > 40.0 &&
              p.palm_height > 40.0 && p.wrist_width > 20.0;
    for (const auto& f : p.fingers)
        ok = ok && finite(f.length) && finite(f.width) && finite(f.base_offset) &&
             finite(f.tilt_deg) && f.length > 10.0 && f.width > 4.0;
    if (!ok) fail(ErrorCode::InvalidParams, "hand parameters are not a plausible geometry");
}

HandParams apply_jitter(const HandParams& params, Rng& rng) {
    HandParams p = params;
    const double s = params.jitter_sigma;
    for (auto& f : p.fingers) {
        f.length = std::clamp(f.length + rng.normal(0.0, s), 50.0, 160.0);
        f.width = std::clamp(f.width + rng.normal(0.0, 0.5 * s), 14.0, 40.0);
        f.base_offset += rng.normal(0.0, s) / p.palm_width;
        f.tilt_deg += rng.normal(0.0, 0.3 * s);
    }
    p.palm_width += rng.normal(0.0, 0.5 * s);
    p.palm_height += rng.normal(0.0, 0.5 * s);
    p.wrist_width += rng.normal(0.0, 0.5 * s);
    p.center_x += rng.normal(0.0, s);
    p.palm_top += rng.normal(0.0, s);
    return p;
}

}  // namespace

HandParams sample_person(std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x5a17));
    constexpr int kMaxAttempts = 100;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        HandParams p;
        p.palm_width = rng.uniform(235.0, 300.0);
        p.palm_height = rng.uniform(240.0, 310.0);
        p.wrist_width = rng.uniform(150.0, 200.0);
        p.center_x = rng.uniform(400.0, 450.0);
        p.palm_top = rng.uniform(280.0, 330.0);
        p.jitter_sigma = 1.0;
        // thumb, first, middle, ring, little
        const double len_lo[5] = {65, 95, 110, 100, 60};
        const double len_hi[5] = {100, 135, 155, 140, 95};
        const double wid_lo[5] = {20, 16, 17, 16, 14};
        const double wid_hi[5] = {32, 26, 28, 26, 22};
        const double off_lo[5] = {0.93, 0.76, 0.55, 0.31, 0.08};
        const double off_hi[5] = {0.97, 0.80, 0.60, 0.36, 0.12};
        const double tilt_lo[5] = {28, 0, -1, -3, -6};
        const double tilt_hi[5] = {40, 4, 2, 0, -2};
        for (int i = 0; i < 5; ++i) {
            p.fingers[i].length = rng.uniform(len_lo[i], len_hi[i]);
            p.fingers[i].width = rng.uniform(wid_lo[i], wid_hi[i]);
            p.fingers[i].base_offset = rng.uniform(off_lo[i], off_hi[i]);
            p.fingers[i].tilt_deg = rng.uniform(tilt_lo[i], tilt_hi[i]);
        }

        // Finger separation at the palm edge: adjacent flanks must keep a
        // visible gap (x order little, ring, middle, first, thumb).
        const Geometry g = resolve_geometry(p);
        const int order[5] = {4, 3, 2, 1, 0};
        bool ok = true;
        for (int j = 0; j + 1 < 5 && ok; ++j) {
            const double east = flank_crossing_x(g.fingers[order[j]], g.palm_bottom, +1.0);
            const double west = flank_crossing_x(g.fingers[order[j + 1]], g.palm_bottom, -1.0);
            ok = west - east > 6.0;
        }
        // Little finger must stay on the palm.
        ok = ok && flank_crossing_x(g.fingers[4], g.palm_bottom, -1.0) > g.palm_left + 2.0;
        if (ok) return p;
    }
    fail(ErrorCode::InvalidParams, "could not sample non-overlapping hand parameters");
}

Acquisition render(const HandParams& params, std::uint64_t acquisition_seed,
                   double pixel_noise_sigma) {
    validate_params(params);
    Rng rng(mix_seed(acquisition_seed, 0xACC));
    const HandParams jittered = apply_jitter(params, rng);
    validate_params(jittered);
    const Geometry g = resolve_geometry(jittered);
    const imaging::BinaryImage mask = rasterize(g);

    Acquisition acq;
    acq.truth = compute_truth(jittered, g, mask);
    acq.image = imaging::make_gray(kCanvasWidth, kCanvasHeight);
    for (size_t i = 0; i < mask.bits.size(); ++i) {
        const double base = mask.bits[i] ? kHandIntensity : kBackgroundIntensity;
        const double noisy =
            pixel_noise_sigma > 0.0 ? base + rng.normal(0.0, pixel_noise_sigma) : base;
        acq.image.pixels[i] = std::clamp(noisy, 0.0, 1.0);
    }
    return acq;
}

HandParams make_defective(const HandParams& params, DefectKind kind) {
    HandParams p = params;
    if (kind == DefectKind::MergedFingers) {
        // Slide the ring finger against the middle finger so the shafts fuse.
        const double half_sum = (p.fingers[2].width + p.fingers[3].width) / 2.0;
        p.fingers[3].base_offset = p.fingers[2].base_offset - 0.55 * half_sum / p.palm_width;
        p.fingers[3].tilt_deg = p.fingers[2].tilt_deg;
    } else {
        // Drop the hand until the middle fingertip runs off the bottom edge.
        p.palm_top = kCanvasHeight - p.palm_height - p.fingers[2].length + 10.0;
    }
    return p;
}

namespace {

bool passes_pipeline(const imaging::GrayImage& img) {
    try {
        const auto filtered = imaging::lowpass_filter(img, 2);
        const auto mask = imaging::binarize(filtered, 0.07);
        const auto chain = contour::trace_contour(mask);
        (void)contour::find_landmarks(chain);
        return true;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

DatasetResult make_dataset(const std::string& out_dir, int persons, int acquisitions,
                           std::uint64_t master_seed, double jitter_sigma) {
    if (persons < 2 || acquisitions < 2)
        fail(ErrorCode::InvalidParams, "dataset needs >= 2 persons and >= 2 acquisitions");
    std::filesystem::create_directories(out_dir);

    DatasetResult result;
    std::ostringstream csv;
    csv << "person,acq";
    for (int t = 1; t <= 5; ++t) csv << ",tip" << t << "x,tip" << t << "y";
    for (int f = 1; f <= features::kFull13Size; ++f) csv << ",f" << f;
    csv << "\n";

    char buf[64];
    for (int person = 1; person <= persons; ++person) {
        HandParams params = sample_person(mix_seed(master_seed, 0x700 + person));
        params.jitter_sigma = jitter_sigma;
        for (int acq = 1; acq <= acquisitions; ++acq) {
            bool done = false;
            for (int retry = 0; retry < 100 && !done; ++retry) {
                const std::uint64_t seed =
                    mix_seed(master_seed, (static_cast<std::uint64_t>(person) << 24) |
                                              (static_cast<std::uint64_t>(acq) << 8) | retry);
                const Acquisition sample = render(params, seed);
                if (!passes_pipeline(sample.image)) {
                    ++result.regenerated;
                    continue;
                }
                std::snprintf(buf, sizeof(buf), "p%02d_a%02d.pgm", person, acq);
                const std::string path = out_dir + "/" + buf;
                imaging::save_pgm(sample.image, path);
                result.image_paths.push_back(path);

                csv << person << "," << acq;
                for (const auto& tip : sample.truth.tips) {
                    std::snprintf(buf, sizeof(buf), ",%.12g,%.12g", tip.x, tip.y);
                    csv << buf;
                }
                for (const double v : sample.truth.full13.values) {
                    std::snprintf(buf, sizeof(buf), ",%.12g", v);
                    csv << buf;
                }
                csv << "\n";
                done = true;
            }
            if (!done)
                fail(ErrorCode::GenerationExhausted,
                     "person " + std::to_string(person) + " acquisition " + std::to_string(acq) +
                         " failed after 100 attempts");
        }
    }

    result.ground_truth_csv = out_dir + "/ground_truth.csv";
    const std::string tmp = result.ground_truth_csv + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, result.ground_truth_csv + ": cannot open for writing");
        out << csv.str();
        if (!out) fail(ErrorCode::IoError, result.ground_truth_csv + ": write failed");
    }
    std::filesystem::rename(tmp, result.ground_truth_csv);
    return result;
}

std::vector<TruthRow> load_truth_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::IoError, path + ": empty ground truth");
    std::vector<TruthRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<double> nums;
        TruthRow row;
        int col = 0;
        while (std::getline(ls, field, ',')) {
            try {
                if (col == 0)
                    row.person = std::stoi(field);
                else if (col == 1)
                    row.acquisition = std::stoi(field);
                else
                    nums.push_back(std::stod(field));
            } catch (const std::exception&) {
                fail(ErrorCode::UnsupportedFormat, path + ": bad field '" + field + "'");
            }
            ++col;
        }
        if (nums.size() != 10 + features::kFull13Size)
            fail(ErrorCode::UnsupportedFormat, path + ": row with wrong column count");
        for (int t = 0; t < 5; ++t) row.truth.tips[t] = {nums[2 * t], nums[2 * t + 1]};
        row.truth.full13.schema = features::Schema::Full13;
        row.truth.full13.values.assign(nums.begin() + 10, nums.end());
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace handgeo::synth
