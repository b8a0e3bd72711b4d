// SPDX-License-Identifier: Apache-2.0
#include "handgeo/contour.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace handgeo::contour {

namespace {

constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

// Smoothed-direction threshold separating descending/ascending phases.
constexpr double kPhaseThreshold = 0.3;
constexpr int kSmoothWindow = 9;

struct Component {
    size_t pixels = 0;
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;

    long bbox_area() const {
        return static_cast<long>(max_x - min_x + 1) * (max_y - min_y + 1);
    }
};

}  // namespace

Point code_delta(std::uint8_t code) { return {kDx[code & 7], kDy[code & 7]}; }

std::vector<Point> contour_points(const ChainCode& chain) {
    std::vector<Point> pts;
    pts.reserve(chain.codes.size() + 1);
    Point p = chain.start;
    pts.push_back(p);
    for (size_t i = 0; i + 1 < chain.codes.size(); ++i) {
        const Point d = code_delta(chain.codes[i]);
        p = {p.x + d.x, p.y + d.y};
        pts.push_back(p);
    }
    return pts;
}

ChainCode trace_contour(const imaging::BinaryImage& mask, size_t min_component_pixels) {
    const int w = mask.width, h = mask.height;
    if (mask.count_foreground() == 0)
        fail(ErrorCode::EmptyForeground, "trace_contour requires a foreground region");

    // Label 8-connected components.
    std::vector<int> label(static_cast<size_t>(w) * h, -1);
    std::vector<Component> comps;
    std::vector<size_t> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t idx = static_cast<size_t>(y) * w + x;
            if (!mask.bits[idx] || label[idx] >= 0) continue;
            const int id = static_cast<int>(comps.size());
            Component comp;
            comp.min_x = comp.max_x = x;
            comp.min_y = comp.max_y = y;
            label[idx] = id;
            stack.assign(1, idx);
            while (!stack.empty()) {
                const size_t cur = stack.back();
                stack.pop_back();
                ++comp.pixels;
                const int cx = static_cast<int>(cur % w), cy = static_cast<int>(cur / w);
                comp.min_x = std::min(comp.min_x, cx);
                comp.max_x = std::max(comp.max_x, cx);
                comp.min_y = std::min(comp.min_y, cy);
                comp.max_y = std::max(comp.max_y, cy);
                for (int d = 0; d < 8; ++d) {
                    const int nx = cx + kDx[d], ny = cy + kDy[d];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    const size_t nidx = static_cast<size_t>(ny) * w + nx;
                    if (mask.bits[nidx] && label[nidx] < 0) {
                        label[nidx] = id;
                        stack.push_back(nidx);
                    }
                }
            }
            comps.push_back(comp);
        }
    }

    // Largest component; ties broken by bounding-box area, then topmost-leftmost.
    int best = 0;
    for (int i = 1; i < static_cast<int>(comps.size()); ++i) {
        const Component &a = comps[i], &b = comps[best];
        if (a.pixels != b.pixels) {
            if (a.pixels > b.pixels) best = i;
        } else if (a.bbox_area() != b.bbox_area()) {
            if (a.bbox_area() > b.bbox_area()) best = i;
        } else if (a.min_y != b.min_y) {
            if (a.min_y < b.min_y) best = i;
        } else if (a.min_x < b.min_x) {
            best = i;
        }
    }
    if (comps[best].pixels < min_component_pixels)
        fail(ErrorCode::ComponentTooSmall,
             "largest component has " + std::to_string(comps[best].pixels) + " pixels, need >= " +
                 std::to_string(min_component_pixels));

    // Topmost-then-leftmost pixel of the chosen component.
    Point start{-1, -1};
    for (int y = comps[best].min_y; y <= comps[best].max_y && start.x < 0; ++y) {
        for (int x = comps[best].min_x; x <= comps[best].max_x; ++x) {
            if (label[static_cast<size_t>(y) * w + x] == best) {
                start = {x, y};
                break;
            }
        }
    }

    auto inside = [&](int x, int y) {
        return x >= 0 && x < w && y >= 0 && y < h &&
               label[static_cast<size_t>(y) * w + x] == best;
    };

    // Clockwise Moore trace: arriving via direction `din`, scan from din+2
    // rotating clockwise (decreasing code) for the next foreground neighbor.
    auto next_dir = [&](Point p, int din) -> int {
        for (int k = 0; k < 8; ++k) {
            const int d = ((din + 2 - k) % 8 + 8) % 8;
            if (inside(p.x + kDx[d], p.y + kDy[d])) return d;
        }
        return -1;
    };

    ChainCode chain;
    chain.start = start;
    chain.width = w;
    chain.height = h;

    const int first_dir = next_dir(start, 0);
    if (first_dir < 0) return chain;  // isolated pixel: empty closed chain

    Point p = start;
    int din = 0;
    while (true) {
        const int d = next_dir(p, din);
        if (p == start && d == first_dir && !chain.codes.empty()) break;
        chain.codes.push_back(static_cast<std::uint8_t>(d));
        p = {p.x + kDx[d], p.y + kDy[d]};
        din = d;
        if (chain.codes.size() > 8 * static_cast<size_t>(w) * h)
            fail(ErrorCode::InvalidParams, "contour trace failed to terminate");
    }
    return chain;
}

double perimeter(const ChainCode& chain) {
    double total = 0.0;
    for (const auto code : chain.codes) total += (code % 2 == 0) ? 1.0 : std::sqrt(2.0);
    return total;
}

double enclosed_area(const ChainCode& chain) {
    const auto pts = contour_points(chain);
    if (pts.size() < 3) return 0.0;
    long long twice_area = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        const Point& a = pts[i];
        const Point& b = pts[(i + 1) % pts.size()];
        twice_area += static_cast<long long>(a.x) * b.y - static_cast<long long>(b.x) * a.y;
    }
    return std::abs(static_cast<double>(twice_area)) / 2.0;
}

namespace {

[[noreturn]] void reject(const std::string& reason) {
    fail(ErrorCode::DefectiveAcquisition, reason);
}

}  // namespace

Landmarks find_landmarks(const ChainCode& chain) {
    const size_t n = chain.codes.size();
    if (n < 64) reject("contour too short for a hand silhouette (" + std::to_string(n) + " steps)");
    const auto pts = contour_points(chain);

    const bool dims_known = chain.width > 0 && chain.height > 0;
    if (dims_known) {
        for (const auto& p : pts) {
            if (p.x == 0 || p.x == chain.width - 1 || p.y == chain.height - 1)
                reject("silhouette cut by the image border away from the wrist");
        }
    }

    // The wrist is the topmost run of the contour: the border cut when the
    // forearm leaves the frame, or the flat top of a contained silhouette.
    // The trace starts on that run, so it occupies indices [0, a].
    int min_y = pts[0].y;
    for (const auto& p : pts) min_y = std::min(min_y, p.y);
    if (pts[0].y != min_y) reject("contour start is not on the topmost run");
    size_t wrist_right = 0;
    while (wrist_right + 1 < n && pts[wrist_right + 1].y == min_y &&
           pts[wrist_right + 1].x > pts[wrist_right].x)
        ++wrist_right;

    // Smoothed vertical step signal; +1 descends (codes 5,6,7), -1 ascends
    // (codes 1,2,3). Circular moving average, window kSmoothWindow.
    std::vector<double> smooth(n, 0.0);
    const int half = kSmoothWindow / 2;
    for (size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
            const size_t j = (i + n + static_cast<size_t>(k + static_cast<int>(n))) % n;
            acc += kDy[chain.codes[j] & 7];
        }
        smooth[i] = acc / kSmoothWindow;
    }

    // Classify each step between the wrist endpoints, then read off tips as
    // descend-to-ascend reversals and valleys as the opposite.
    enum class Phase { None, Down, Up };
    Phase phase = Phase::None;
    size_t phase_end = wrist_right;  // last step index of the current phase
    std::vector<size_t> tips, valleys;
    bool starts_descending = false;

    for (size_t i = wrist_right; i < n; ++i) {
        Phase s = Phase::None;
        if (smooth[i] > kPhaseThreshold)
            s = Phase::Down;
        else if (smooth[i] < -kPhaseThreshold)
            s = Phase::Up;
        if (s == Phase::None || s == phase) {
            if (s == phase && s != Phase::None) phase_end = i;
            continue;
        }
        if (phase == Phase::None) {
            starts_descending = s == Phase::Down;
        } else {
            // Reversal: landmark at the midpoint of the transition run.
            const size_t mark = (phase_end + 1 + i) / 2;
            if (phase == Phase::Down && s == Phase::Up)
                tips.push_back(mark);
            else
                valleys.push_back(mark);
        }
        phase = s;
        phase_end = i;
    }

    if (!starts_descending) reject("contour does not descend from the wrist");
    if (tips.size() != 5)
        reject("expected 5 fingertips, found " + std::to_string(tips.size()));
    if (valleys.size() != 4)
        reject("expected 4 valleys, found " + std::to_string(valleys.size()));

    Landmarks lm;
    for (size_t i = 0; i < 5; ++i) lm.tips[i] = tips[i];
    for (size_t i = 0; i < 4; ++i) lm.valleys[i] = valleys[i];
    lm.wrist = {wrist_right, 0};

    // Tips and valleys must interleave along the contour.
    for (size_t i = 0; i < 4; ++i) {
        if (!(lm.tips[i] < lm.valleys[i] && lm.valleys[i] < lm.tips[i + 1]))
            reject("fingertips and valleys do not alternate");
    }
    if (!(lm.wrist.first < lm.tips[0])) reject("thumb precedes the wrist segment");
    return lm;
}

std::string chain_to_text(const ChainCode& chain) {
    std::ostringstream out;
    out << chain.start.x << " " << chain.start.y << "\n";
    for (const auto code : chain.codes) out << static_cast<char>('0' + code);
    out << "\n";
    return out.str();
}

ChainCode chain_from_text(const std::string& text) {
    std::istringstream in(text);
    ChainCode chain;
    if (!(in >> chain.start.x >> chain.start.y))
        fail(ErrorCode::InvalidArgument, "chain text: missing start coordinates");
    std::string digits;
    if (!(in >> digits)) digits.clear();
    chain.codes.reserve(digits.size());
    for (const char c : digits) {
        if (c < '0' || c > '7')
            fail(ErrorCode::InvalidArgument, std::string("chain text: invalid code '") + c + "'");
        chain.codes.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return chain;
}

}  // namespace handgeo::contour
