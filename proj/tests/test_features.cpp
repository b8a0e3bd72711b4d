// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "handgeo/contour.hpp"
#include "handgeo/features.hpp"
#include "handgeo/synth.hpp"
#include "test_support.hpp"

using namespace handgeo;
using namespace handgeo::features;
using test_support::expect_error;

namespace {

struct Extracted {
    contour::ChainCode chain;
    contour::Landmarks lm;
    FeatureVector full;
};

Extracted extract(const imaging::GrayImage& img) {
    Extracted out;
    out.chain = contour::trace_contour(imaging::binarize(img, 0.07));
    out.lm = contour::find_landmarks(out.chain);
    out.full = measure(out.chain, out.lm);
    return out;
}

}  // namespace

TEST_CASE("measure agrees with generator ground truth") {
    synth::HandParams params = synth::sample_person(42);
    params.jitter_sigma = 0.0;
    params.fingers[0].length = 90.0;
    params.fingers[1].length = 110.0;
    params.fingers[2].length = 120.0;
    params.fingers[3].length = 112.0;
    params.fingers[4].length = 85.0;
    const synth::Acquisition acq = synth::render(params, 1, 0.0);
    const Extracted got = extract(acq.image);

    // Finger lengths (f1..f5) within 5 px of the analytic values.
    for (int i = 0; i < 5; ++i)
        CHECK(std::abs(got.full.values[i] - acq.truth.full13.values[i]) <= 5.0);
    // Finger widths measured mid-shaft stay close to the capsule diameters.
    for (int i = 7; i < 11; ++i)
        CHECK(std::abs(got.full.values[i] - acq.truth.full13.values[i]) <= 5.0);
    // Wrist length and thumb base width.
    CHECK(std::abs(got.full.values[5] - acq.truth.full13.values[5]) <= 5.0);
    CHECK(std::abs(got.full.values[6] - acq.truth.full13.values[6]) <= 8.0);
    // Perimeter and surface against the noiseless-chain ground truth.
    CHECK(got.full.values[11] ==
          doctest::Approx(acq.truth.full13.values[11]).epsilon(0.02));
    CHECK(got.full.values[12] ==
          doctest::Approx(acq.truth.full13.values[12]).epsilon(0.02));

    // Perimeter and surface fields are definitional.
    CHECK(got.full.values[11] == contour::perimeter(got.chain));
    CHECK(got.full.values[12] == contour::enclosed_area(got.chain));
}

TEST_CASE("measure is deterministic for noise-free repeats") {
    synth::HandParams params = synth::sample_person(9);
    params.jitter_sigma = 0.0;
    const synth::Acquisition a = synth::render(params, 1, 0.0);
    const synth::Acquisition b = synth::render(params, 2, 0.0);
    CHECK(a.image.pixels == b.image.pixels);
    CHECK(extract(a.image).full.values == extract(b.image).full.values);
}

TEST_CASE("measure is translation invariant") {
    synth::HandParams params = synth::sample_person(4);
    params.jitter_sigma = 0.0;
    const synth::Acquisition acq = synth::render(params, 1, 0.0);
    auto mask = imaging::binarize(acq.image, 0.07);
    // Detach from the top border so the silhouette can be shifted.
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < mask.width; ++x) mask.set(x, y, false);

    auto shifted = imaging::make_binary(mask.width, mask.height);
    const int dx = 21, dy = 13;
    for (int y = 0; y + dy < mask.height; ++y)
        for (int x = 0; x + dx < mask.width; ++x)
            if (mask.at(x, y)) shifted.set(x + dx, y + dy, true);

    const auto chain_a = contour::trace_contour(mask);
    const auto chain_b = contour::trace_contour(shifted);
    const auto fa = measure(chain_a, contour::find_landmarks(chain_a));
    const auto fb = measure(chain_b, contour::find_landmarks(chain_b));
    for (int i = 0; i < kFull13Size; ++i)
        CHECK(fa.values[i] == doctest::Approx(fb.values[i]).epsilon(1e-12));
}

TEST_CASE("select keeps the nine retained features in order") {
    FeatureVector full;
    full.schema = Schema::Full13;
    full.values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
    const FeatureVector nine = select(full);
    CHECK(nine.schema == Schema::Selected9);
    CHECK(nine.values == std::vector<double>{2, 3, 4, 5, 8, 9, 10, 11, 12});

    expect_error(ErrorCode::WrongSchema, [&] { (void)select(nine); });

    FeatureVector zeros;
    zeros.schema = Schema::Full13;
    zeros.values.assign(13, 0.0);
    const FeatureVector z9 = select(zeros);
    CHECK(z9.values == std::vector<double>(9, 0.0));
}

TEST_CASE("fit_scaling tracks column extrema") {
    FeatureVector a, b;
    a.schema = b.schema = Schema::Selected9;
    a.values = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    b.values = {10, 1, -2, 3, 4, 5, 6, 7, 9};
    const ScalingParams single = fit_scaling({a});
    CHECK(single.min == a.values);
    CHECK(single.max == a.values);

    const ScalingParams both = fit_scaling({a, b});
    CHECK(both.min[0] == 0.0);
    CHECK(both.max[0] == 10.0);
    CHECK(both.min[2] == -2.0);

    expect_error(ErrorCode::EmptyTrainingSet, [] { (void)fit_scaling({}); });
}

TEST_CASE("fit_scaling on a generated store matches a direct min/max oracle") {
    Rng rng(15);
    std::vector<FeatureVector> train;
    for (int i = 0; i < 110; ++i) {
        FeatureVector fv;
        fv.schema = Schema::Selected9;
        for (int d = 0; d < 9; ++d) fv.values.push_back(rng.uniform(10.0, 200.0));
        train.push_back(fv);
    }
    const ScalingParams params = fit_scaling(train);
    for (int d = 0; d < 9; ++d) {
        double lo = 1e300, hi = -1e300;
        for (const auto& fv : train) {
            lo = std::min(lo, fv.values[d]);
            hi = std::max(hi, fv.values[d]);
        }
        CHECK(params.min[d] == lo);
        CHECK(params.max[d] == hi);
    }
}

TEST_CASE("scale endpoint and degenerate behavior") {
    ScalingParams params;
    params.min = {0.0, 5.0};
    params.max = {10.0, 5.0};
    FeatureVector fv;
    fv.schema = Schema::Selected9;

    fv.values = {0.0, 5.0};
    CHECK(scale(fv, params).values == std::vector<double>{-1.0, 0.0});
    fv.values = {10.0, 5.0};
    CHECK(scale(fv, params).values == std::vector<double>{1.0, 0.0});
    fv.values = {5.0, 7.0};
    CHECK(scale(fv, params).values == std::vector<double>{0.0, 0.0});

    // Out-of-range test vectors clamp by default, pass through with clamp off.
    fv.values = {15.0, 5.0};
    CHECK(scale(fv, params).values[0] == 1.0);
    CHECK(scale(fv, params, false).values[0] == doctest::Approx(2.0));

    fv.values = {1.0};
    expect_error(ErrorCode::SchemaMismatch, [&] { (void)scale(fv, params); });
}

TEST_CASE("scale is strictly monotone on non-degenerate dimensions") {
    ScalingParams params;
    params.min = {2.0};
    params.max = {8.0};
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        FeatureVector lo, hi;
        lo.schema = hi.schema = Schema::Selected9;
        const double a = rng.uniform(2.0, 8.0);
        const double b = rng.uniform(2.0, 8.0);
        lo.values = {std::min(a, b)};
        hi.values = {std::max(a, b) + 1e-9};
        CHECK(scale(lo, params).values[0] < scale(hi, params).values[0]);
    }
}

TEST_CASE("within-person spread grows with acquisition jitter") {
    const double sigmas[] = {0.0, 1.0, 2.0, 4.0};
    std::vector<double> spreads;
    for (const double sigma : sigmas) {
        synth::HandParams params = synth::sample_person(77);
        params.jitter_sigma = sigma;
        std::vector<std::vector<double>> vecs;
        for (int acq = 0; acq < 6; ++acq)
            vecs.push_back(synth::render(params, 100 + acq, 0.0).truth.full13.values);
        // Mean per-dimension standard deviation of the true features.
        double total = 0.0;
        for (int d = 0; d < kFull13Size; ++d) {
            double mean = 0.0;
            for (const auto& v : vecs) mean += v[d];
            mean /= vecs.size();
            double var = 0.0;
            for (const auto& v : vecs) var += (v[d] - mean) * (v[d] - mean);
            total += std::sqrt(var / (vecs.size() - 1));
        }
        spreads.push_back(total / kFull13Size);
    }
    // Rank correlation with sigma must be positive; zero jitter leaves only
    // floating-point residue in the spread.
    CHECK(spreads[0] < 1e-9);
    int concordant = 0, discordant = 0;
    for (size_t a = 0; a < spreads.size(); ++a)
        for (size_t b = a + 1; b < spreads.size(); ++b)
            (spreads[b] > spreads[a] ? concordant : discordant)++;
    CHECK(concordant > discordant);
}

TEST_CASE("select of measured features is nonnegative") {
    synth::HandParams params = synth::sample_person(33);
    const synth::Acquisition acq = synth::render(params, 2);
    const auto filtered = imaging::lowpass_filter(acq.image, 2);
    const auto chain = contour::trace_contour(imaging::binarize(filtered, 0.07));
    const auto full = measure(chain, contour::find_landmarks(chain));
    for (const double v : select(full).values) CHECK(v >= 0.0);
}

TEST_CASE("feature CSV round trip") {
    const auto dir = test_support::temp_dir("features");
    std::vector<FeatureRow> rows;
    Rng rng(1);
    for (int person = 1; person <= 3; ++person) {
        for (int acq = 1; acq <= 2; ++acq) {
            FeatureRow row;
            row.person = person;
            row.acquisition = acq;
            row.features.schema = Schema::Full13;
            for (int d = 0; d < 13; ++d) row.features.values.push_back(rng.uniform(0.0, 300.0));
            rows.push_back(row);
        }
    }
    save_feature_csv(rows, dir + "/store.csv");
    const auto back = load_feature_csv(dir + "/store.csv");
    REQUIRE(back.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].person == rows[i].person);
        CHECK(back[i].acquisition == rows[i].acquisition);
        CHECK(back[i].features.schema == Schema::Full13);
        for (int d = 0; d < 13; ++d)
            CHECK(back[i].features.values[d] ==
                  doctest::Approx(rows[i].features.values[d]).epsilon(1e-9));
    }
    expect_error(ErrorCode::IoError, [&] { (void)load_feature_csv(dir + "/none.csv"); });
}
